#include "dualex/solver.hpp"

#include <cmath>
#include <string>
#include <tuple>
#include <utility>

#include "parallel.hpp"

namespace dualex {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

SparseSystem::SparseSystem(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw ArgumentError("SparseSystem dimensions must be at least 1x1");
    std::size_t n = static_cast<std::size_t>(width) * height;
    diag_.assign(n, 0.0);
    right_.assign(n, 0.0);
    down_.assign(n, 0.0);
    rhs_.assign(n, 0.0);
}

void SparseSystem::multiply(std::span<const double> x, std::span<double> y) const {
    const int w = width_, h = height_;
    detail::parallel_rows(h, static_cast<std::size_t>(w) * h, [&](int y0, int y1) {
        for (int row = y0; row < y1; ++row) {
            int i = row * w;
            for (int col = 0; col < w; ++col, ++i) {
                double acc = diag_[i] * x[i];
                if (col + 1 < w) acc += right_[i] * x[i + 1];
                if (col > 0) acc += right_[i - 1] * x[i - 1];
                if (row + 1 < h) acc += down_[i] * x[i + w];
                if (row > 0) acc += down_[i - w] * x[i - w];
                y[i] = acc;
            }
        }
    });
}

SparseSystem assemble(const ScalarField& initial, const ScalarField& wx, const ScalarField& wy,
                      double lambda) {
    if (!same_size(initial, wx) || !same_size(initial, wy))
        throw ArgumentError("assemble: field dimensions must match");
    if (lambda < 0.0) throw ArgumentError("assemble: lambda must be non-negative");

    const int w = initial.width, h = initial.height;
    SparseSystem sys(w, h);
    for (int row = 0; row < h; ++row) {
        int i = row * w;
        for (int col = 0; col < w; ++col, ++i) {
            double d = 1.0;
            if (col + 1 < w) {
                double c = lambda * wx.data[i];
                sys.right(i) = -c;
                d += c;
            }
            if (col > 0) d += lambda * wx.data[i - 1];
            if (row + 1 < h) {
                double c = lambda * wy.data[i];
                sys.down(i) = -c;
                d += c;
            }
            if (row > 0) d += lambda * wy.data[i - w];
            sys.diag(i) = d;
            sys.rhs(i) = initial.data[i];
        }
    }
    return sys;
}

namespace {

// One CG iteration touches every vector a few times, so the kernels below are
// fused and reductions go through per-row partials summed in row order. That
// keeps results bitwise reproducible for any thread count.
struct CgKernels {
    const SparseSystem& sys;
    int w, h;
    std::size_t n;
    std::vector<double> row_a, row_b;

    explicit CgKernels(const SparseSystem& s)
        : sys(s), w(s.width()), h(s.height()), n(static_cast<std::size_t>(s.size())),
          row_a(h), row_b(h) {}

    double sum_rows(const std::vector<double>& partial) const {
        double s = 0.0;
        for (int row = 0; row < h; ++row) s += partial[row];
        return s;
    }

    // q = A p, returns p.q
    double apply_dot(const std::vector<double>& p, std::vector<double>& q) {
        const double* diag = sys.diag_vector().data();
        const double* right = sys.right_vector().data();
        const double* down = sys.down_vector().data();
        detail::parallel_rows(h, n, [&](int y0, int y1) {
            for (int row = y0; row < y1; ++row) {
                double acc = 0.0;
                int i = row * w;
                for (int col = 0; col < w; ++col, ++i) {
                    double v = diag[i] * p[i];
                    if (col + 1 < w) v += right[i] * p[i + 1];
                    if (col > 0) v += right[i - 1] * p[i - 1];
                    if (row + 1 < h) v += down[i] * p[i + w];
                    if (row > 0) v += down[i - w] * p[i - w];
                    q[i] = v;
                    acc += p[i] * v;
                }
                row_a[row] = acc;
            }
        });
        return sum_rows(row_a);
    }

    // x += alpha p; r -= alpha q; returns (r.r, r.(invd*r))
    std::pair<double, double> advance(double alpha, const std::vector<double>& p,
                                      const std::vector<double>& q,
                                      const std::vector<double>& invd, std::vector<double>& x,
                                      std::vector<double>& r) {
        detail::parallel_rows(h, n, [&](int y0, int y1) {
            for (int row = y0; row < y1; ++row) {
                double rr = 0.0, rz = 0.0;
                std::size_t begin = static_cast<std::size_t>(row) * w;
                for (std::size_t i = begin; i < begin + w; ++i) {
                    x[i] += alpha * p[i];
                    double ri = r[i] - alpha * q[i];
                    r[i] = ri;
                    rr += ri * ri;
                    rz += invd[i] * ri * ri;
                }
                row_a[row] = rr;
                row_b[row] = rz;
            }
        });
        return {sum_rows(row_a), sum_rows(row_b)};
    }

    // p = invd r + beta p
    void next_direction(double beta, const std::vector<double>& invd, const std::vector<double>& r,
                        std::vector<double>& p) {
        detail::parallel_rows(h, n, [&](int y0, int y1) {
            for (int row = y0; row < y1; ++row) {
                std::size_t begin = static_cast<std::size_t>(row) * w;
                for (std::size_t i = begin; i < begin + w; ++i) p[i] = invd[i] * r[i] + beta * p[i];
            }
        });
    }

    // r = b - A x, returns (r.r, r.(invd*r))
    std::pair<double, double> residual(const std::vector<double>& b, const std::vector<double>& x,
                                       const std::vector<double>& invd, std::vector<double>& r) {
        const double* diag = sys.diag_vector().data();
        const double* right = sys.right_vector().data();
        const double* down = sys.down_vector().data();
        detail::parallel_rows(h, n, [&](int y0, int y1) {
            for (int row = y0; row < y1; ++row) {
                double rr = 0.0, rz = 0.0;
                int i = row * w;
                for (int col = 0; col < w; ++col, ++i) {
                    double v = diag[i] * x[i];
                    if (col + 1 < w) v += right[i] * x[i + 1];
                    if (col > 0) v += right[i - 1] * x[i - 1];
                    if (row + 1 < h) v += down[i] * x[i + w];
                    if (row > 0) v += down[i - w] * x[i - w];
                    double ri = b[i] - v;
                    r[i] = ri;
                    rr += ri * ri;
                    rz += invd[i] * ri * ri;
                }
                row_a[row] = rr;
                row_b[row] = rz;
            }
        });
        return {sum_rows(row_a), sum_rows(row_b)};
    }
};

}  // namespace

ScalarField solve_cg(const SparseSystem& system, const SolverSettings& settings,
                     SolveStats* stats) {
    if (settings.tolerance <= 0.0) throw ArgumentError("solver tolerance must be positive");
    if (settings.max_iterations < 1) throw ArgumentError("solver max_iterations must be at least 1");

    const std::size_t n = static_cast<std::size_t>(system.size());
    const std::vector<double>& b = system.rhs_vector();
    ScalarField out(system.width(), system.height());

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return out;  // A is SPD, so b = 0 forces x = 0
    }

    std::vector<double> invd(n);
    for (std::size_t i = 0; i < n; ++i) invd[i] = 1.0 / system.diag(static_cast<int>(i));

    CgKernels kernels(system);
    std::vector<double> x = b;  // x0 = b: the solution is a smoothed version of b
    std::vector<double> r(n), p(n), q(n);

    auto [rr, rz] = kernels.residual(b, x, invd, r);
    double rel = std::sqrt(rr) / bnorm;
    int iterations = 0;

    if (rel > settings.tolerance) {
        kernels.next_direction(0.0, invd, r, p);  // p = z = invd r

        bool converged = false;
        while (iterations < settings.max_iterations) {
            ++iterations;
            double pq = kernels.apply_dot(p, q);
            if (pq <= 0.0) break;  // cannot happen for an SPD system; bail out defensively
            double alpha = rz / pq;
            auto [rr_new, rz_new] = kernels.advance(alpha, p, q, invd, x, r);
            rel = std::sqrt(rr_new) / bnorm;
            if (rel <= settings.tolerance) {
                // the recurrence residual can drift from the true one; verify
                std::tie(rr_new, rz_new) = kernels.residual(b, x, invd, r);
                rel = std::sqrt(rr_new) / bnorm;
                if (rel <= settings.tolerance) {
                    converged = true;
                    break;
                }
                kernels.next_direction(0.0, invd, r, p);  // restart from the true residual
                rz = rz_new;
                continue;
            }
            kernels.next_direction(rz_new / rz, invd, r, p);
            rz = rz_new;
        }
        if (!converged && rel > settings.tolerance)
            throw ConvergenceError("conjugate gradients did not converge: residual " +
                                       std::to_string(rel) + " after " +
                                       std::to_string(iterations) + " iterations",
                                   rel, iterations);
    }

    if (stats) *stats = {iterations, rel};
    out.data = std::move(x);
    return out;
}

ScalarField solve_dense_oracle(const SparseSystem& system) {
    const int n = system.size();
    if (n > 4096) throw ArgumentError("solve_dense_oracle: system too large (limit 4096 unknowns)");

    const int w = system.width();
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        at(i, i) = system.diag(i);
        int col = i % w;
        if (col + 1 < w) {
            at(i, i + 1) = system.right(i);
            at(i + 1, i) = system.right(i);
        }
        if (i + w < n) {
            at(i, i + w) = system.down(i);
            at(i + w, i) = system.down(i);
        }
    }

    // in-place Cholesky, A = L L^T
    for (int j = 0; j < n; ++j) {
        double d = at(j, j);
        for (int k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
        if (d <= 0.0) throw ArgumentError("solve_dense_oracle: matrix is not positive definite");
        double ljj = std::sqrt(d);
        at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = at(i, j);
            for (int k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
            at(i, j) = s / ljj;
        }
    }

    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = system.rhs(i);
        for (int k = 0; k < i; ++k) s -= at(i, k) * y[k];
        y[i] = s / at(i, i);
    }
    ScalarField out(system.width(), system.height());
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= at(k, i) * out.data[k];
        out.data[i] = s / at(i, i);
    }
    return out;
}

}  // namespace dualex
