#ifndef WILOC_COMMON_HPP
#define WILOC_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wiloc {

/// Error type thrown by every module for contract violations and bad input.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

    double norm() const { return std::hypot(x, y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double euclid(Vec2 a, Vec2 b) { return (a - b).norm(); }

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}
}  // namespace detail

}  // namespace wiloc

#endif  // WILOC_COMMON_HPP
