#pragma once

/**
 * @file spectral.hpp
 *
 * Covariance, symmetric eigendecomposition (cyclic Jacobi) and fraction of
 * variance explained: the shared substrate of the PCA dimension rules.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lpconc/dataset.hpp"
#include "lpconc/error.hpp"

namespace lpconc {

/// Dense square matrix, row-major. Symmetry is checked where it matters.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
    SquareMatrix(std::size_t n, std::vector<double> values) : n_(n), a_(std::move(values)) {
        detail::require(a_.size() == n_ * n_, "SquareMatrix: value count does not match size");
    }

    static SquareMatrix identity(std::size_t n) {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    static SquareMatrix diagonal(const std::vector<double>& d) {
        SquareMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(i, i) = d[i];
        }
        return m;
    }

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a_) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            s += (*this)(i, i);
        }
        return s;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Descending eigenvalues with their fractions of variance explained.
struct SpectralSummary {
    std::vector<double> eigenvalues;
    std::vector<double> fve;
};

/// Eigenvalues (descending) and unit eigenvectors; `vectors[k]` pairs with `values[k]`.
struct EigenSystem {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};

/**
 * Covariance of the column-centred data divided by n. The 1/n factor is
 * irrelevant to every eigenvalue-ratio rule; centring matches standard PCA.
 */
inline SquareMatrix covariance(const DataMatrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    detail::require(n >= 2, "covariance: need at least two rows");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += x(i, j);
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(n);
    }

    SquareMatrix s(d);
    std::vector<double> centred(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            centred[j] = x(i, j) - mean[j];
        }
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = a; b < d; ++b) {
                s(a, b) += centred[a] * centred[b];
            }
        }
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            s(a, b) /= static_cast<double>(n);
            s(b, a) = s(a, b);
        }
    }
    return s;
}

namespace detail {

inline void require_symmetric(const SquareMatrix& s) {
    double scale = 1.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            scale = std::max(scale, std::fabs(s(i, j)));
        }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            if (std::fabs(s(i, j) - s(j, i)) > 1e-9 * scale) {
                throw Error("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
}

} // namespace detail

/**
 * Cyclic Jacobi eigendecomposition of a symmetric matrix.
 *
 * Sweeps until every off-diagonal entry is below 1e-12 * ||S||_F (at most 100
 * sweeps). Round-off negatives down to -1e-9 * max(1, lambda_max) are clamped
 * to zero; anything more negative means the input was not positive
 * semi-definite and is reported.
 */
inline EigenSystem eigen_system(const SquareMatrix& input, bool require_psd = true) {
    detail::require(input.size() >= 1, "eigen_system: empty matrix");
    detail::require_symmetric(input);
    const std::size_t n = input.size();

    SquareMatrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = 0.5 * (input(i, j) + input(j, i));
        }
    }
    SquareMatrix v = SquareMatrix::identity(n);
    const double tolerance = 1e-12 * a.frobenius_norm();

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off = std::max(off, std::fabs(a(p, q)));
            }
        }
        if (off <= tolerance) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) {
                        continue;
                    }
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = arp - s * (arq + tau * arp);
                    a(p, r) = a(r, p);
                    a(r, q) = arq + s * (arp - tau * arq);
                    a(q, r) = a(r, q);
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenSystem out;
    const double largest = std::fabs(a(order.front(), order.front()));
    const double floor = -1e-9 * std::max(1.0, largest);
    for (std::size_t k : order) {
        double lambda = a(k, k);
        if (require_psd && lambda < 0.0) {
            detail::require(lambda >= floor, "eigen_system: eigenvalue " + std::to_string(lambda) +
                                                 " is negative beyond round-off");
            lambda = 0.0;
        }
        out.values.push_back(lambda);
        std::vector<double> vec(n);
        for (std::size_t r = 0; r < n; ++r) {
            vec[r] = v(r, k);
        }
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

/// f_i = lambda_i / sum_j lambda_j, order preserved.
inline std::vector<double> fve(const std::vector<double>& eigenvalues) {
    detail::require(!eigenvalues.empty(), "fve: empty spectrum");
    double total = 0.0;
    for (double l : eigenvalues) {
        detail::require(l >= 0.0, "fve: negative eigenvalue");
        total += l;
    }
    detail::require(total > 0.0, "fve: all-zero spectrum");
    std::vector<double> out;
    out.reserve(eigenvalues.size());
    for (double l : eigenvalues) {
        out.push_back(l / total);
    }
    return out;
}

/// Eigenvalues of a covariance-like matrix, descending, with their FVE.
inline SpectralSummary sym_eigen(const SquareMatrix& s) {
    SpectralSummary out;
    out.eigenvalues = eigen_system(s).values;
    const double total = std::accumulate(out.eigenvalues.begin(), out.eigenvalues.end(), 0.0);
    if (total > 0.0) {
        out.fve = fve(out.eigenvalues);
    } else {
        out.fve.assign(out.eigenvalues.size(), 0.0);
    }
    return out;
}

} // namespace lpconc
