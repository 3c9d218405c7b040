#include <cstdio>
int main() { std::puts("wiloc: placeholder"); return 0; }
