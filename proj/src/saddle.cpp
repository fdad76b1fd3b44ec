#include "channel/saddle.hpp"

namespace channel {

SaddleSolver::SaddleSolver(const FunctionSpaceLayout& layout, const SpMat& A_reduced,
                           const SpMat& B_reduced, const Vector& pressure_gauge)
    : nv_(layout.n_reduced), np_(layout.n_pressure()), gauge_(pressure_gauge) {
    if (A_reduced.rows() != nv_ || A_reduced.cols() != nv_)
        throw ValidationError("saddle: velocity block size mismatch");
    if (B_reduced.rows() != np_ || B_reduced.cols() != nv_)
        throw ValidationError("saddle: divergence block size mismatch");
    if (gauge_.size() != np_) throw ValidationError("saddle: gauge vector size mismatch");

    const int n = nv_ + np_ + 1;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(A_reduced.nonZeros() + 2 * B_reduced.nonZeros() + 2 * np_);
    for (int k = 0; k < A_reduced.outerSize(); ++k)
        for (SpMat::InnerIterator it(A_reduced, k); it; ++it)
            trips.emplace_back((int)it.row(), (int)it.col(), it.value());
    for (int k = 0; k < B_reduced.outerSize(); ++k)
        for (SpMat::InnerIterator it(B_reduced, k); it; ++it) {
            trips.emplace_back(nv_ + (int)it.row(), (int)it.col(), it.value());
            trips.emplace_back((int)it.col(), nv_ + (int)it.row(), it.value());
        }
    for (int i = 0; i < np_; ++i) {
        trips.emplace_back(nv_ + i, n - 1, gauge_[i]);
        trips.emplace_back(n - 1, nv_ + i, gauge_[i]);
    }
    M_.resize(n, n);
    M_.setFromTriplets(trips.begin(), trips.end());
    M_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    lu_->compute(M_);
    if (lu_->info() != Eigen::Success)
        throw SolverError("saddle: factorization failed (singular system?)");
}

SaddleSolver::Result SaddleSolver::solve(const Vector& f_reduced, const Vector& h) const {
    if (f_reduced.size() != nv_) throw ValidationError("saddle: rhs size mismatch");
    Vector rhs = Vector::Zero(nv_ + np_ + 1);
    rhs.head(nv_) = f_reduced;
    if (h.size()) {
        if (h.size() != np_) throw ValidationError("saddle: pressure rhs size mismatch");
        rhs.segment(nv_, np_) = h;
    }
    Vector sol = lu_->solve(rhs);
    // two rounds of iterative refinement: the layer terms make the system
    // stiff enough that raw LU leaves ~1e-8 of relative residual behind
    for (int k = 0; k < 2; ++k) sol += lu_->solve(Vector(rhs - M_ * sol));
    Result r;
    r.v = sol.head(nv_);
    r.p = -sol.segment(nv_, np_);
    return r;
}

}  // namespace channel
