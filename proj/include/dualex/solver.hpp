#pragma once

#include <span>
#include <vector>

#include "dualex/image.hpp"

namespace dualex {

struct SolverSettings {
    double tolerance = 1e-5;   // relative residual ||Ax-b|| / ||b||
    int max_iterations = 5000;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // achieved relative residual
};

/// Symmetric positive-definite system on the pixel grid, five-point stencil:
/// one diagonal band plus the four neighbor bands. Pixels are row-major.
/// `right(i)` couples pixel i with i+1 (zero in the last column), `down(i)`
/// couples i with i+width (zero in the last row); symmetry is implicit.
class SparseSystem {
public:
    SparseSystem(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    int size() const { return width_ * height_; }

    double& diag(int i) { return diag_[i]; }
    double diag(int i) const { return diag_[i]; }
    double& right(int i) { return right_[i]; }
    double right(int i) const { return right_[i]; }
    double& down(int i) { return down_[i]; }
    double down(int i) const { return down_[i]; }
    double& rhs(int i) { return rhs_[i]; }
    double rhs(int i) const { return rhs_[i]; }
    const std::vector<double>& rhs_vector() const { return rhs_; }
    const std::vector<double>& diag_vector() const { return diag_; }
    const std::vector<double>& right_vector() const { return right_; }
    const std::vector<double>& down_vector() const { return down_; }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;

private:
    int width_;
    int height_;
    std::vector<double> diag_, right_, down_, rhs_;
};

/// Build the normal equations of the smoothing objective
///   sum_p (L_p - initial_p)^2
///     + lambda * (wx_p (L_right - L_p)^2 + wy_p (L_down - L_p)^2)
/// with forward differences and replicate boundaries (the difference at the
/// last column/row is zero, so those weights never enter the system).
SparseSystem assemble(const ScalarField& initial, const ScalarField& wx, const ScalarField& wy,
                      double lambda);

/// Jacobi-preconditioned conjugate gradients, initial guess x0 = b.
/// Throws ConvergenceError when max_iterations is reached first.
ScalarField solve_cg(const SparseSystem& system, const SolverSettings& settings,
                     SolveStats* stats = nullptr);

/// Exact solve via dense Cholesky of the expanded matrix. Refuses systems
/// above 4096 unknowns; intended for validation, not production runs.
ScalarField solve_dense_oracle(const SparseSystem& system);

}  // namespace dualex
