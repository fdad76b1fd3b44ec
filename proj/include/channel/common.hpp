#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace channel {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Row-major 2x2, m[i][j] = d v_i / d x_j for velocity gradients.
struct Mat2 {
    std::array<std::array<double, 2>, 2> m{{{0.0, 0.0}, {0.0, 0.0}}};

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    double trace() const { return m[0][0] + m[1][1]; }
    double frobenius2() const {
        return m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
    }
    // |D|^2 with D = (A + A^T)/2.
    double sym_frobenius2() const {
        double d01 = 0.5 * (m[0][1] + m[1][0]);
        return m[0][0] * m[0][0] + m[1][1] * m[1][1] + 2.0 * d01 * d01;
    }
    Vec2 apply(const Vec2& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }
};

// Errors map to CLI exit codes: 1 validation, 2 solver/numerical, 3 invariant.
struct Error : std::runtime_error {
    int exit_code;
    Error(const std::string& what, int code) : std::runtime_error(what), exit_code(code) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(what, 1) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& what) : Error(what, 2) {}
};

struct InvariantError : Error {
    explicit InvariantError(const std::string& what) : Error(what, 3) {}
};

}  // namespace channel
