#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "channel/fe.hpp"

namespace channel {

// Factor-once solver for the mixed system
//   [ A   B^T  0 ] [ v ]   [ f ]
//   [ B   0    c ] [ q ] = [ h ]     (q = -p; the sign keeps the layout
//   [ 0   c^T  0 ] [ l ]   [ 0 ]      symmetric when A is)
// where c holds the pressure basis integrals enforcing the mean-zero gauge.
class SaddleSolver {
public:
    SaddleSolver(const FunctionSpaceLayout& layout, const SpMat& A_reduced,
                 const SpMat& B_reduced, const Vector& pressure_gauge);

    struct Result {
        Vector v;  // reduced velocity coefficients
        Vector p;  // mean-zero pressure
    };
    Result solve(const Vector& f_reduced, const Vector& h = Vector()) const;

    int n_velocity() const { return nv_; }
    int n_pressure() const { return np_; }

private:
    int nv_, np_;
    Vector gauge_;
    SpMat M_;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
};

}  // namespace channel
