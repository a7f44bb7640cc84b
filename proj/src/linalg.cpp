#include "oscd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include "oscd/error.hpp"

namespace oscd {

Matrix Matrix::identity(size_t n) {
    Matrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

double symmetry_gap(const Matrix& m) {
    if (m.rows != m.cols) fail(ErrorCode::dimension_mismatch, "symmetry_gap: matrix not square");
    double max_abs = 0.0;
    double gap = 0.0;
    for (size_t i = 0; i < m.rows; ++i) {
        for (size_t j = 0; j < m.cols; ++j) {
            max_abs = std::max(max_abs, std::abs(m.at(i, j)));
            if (j > i) gap = std::max(gap, std::abs(m.at(i, j) - m.at(j, i)));
        }
    }
    return max_abs > 0.0 ? gap / max_abs : 0.0;
}

SymmetricEigen symmetric_eigen(const Matrix& input, double tol, int max_sweeps) {
    if (input.rows != input.cols) fail(ErrorCode::dimension_mismatch, "symmetric_eigen: matrix not square");
    const size_t n = input.rows;
    if (symmetry_gap(input) > 1e-8) fail(ErrorCode::invalid_value, "symmetric_eigen: matrix not symmetric");

    Matrix a = input;
    Matrix v = Matrix::identity(n);

    auto off_diag_norm = [&]() {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
        return std::sqrt(s);
    };

    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.at(i, i)));
    scale = std::max(scale, off_diag_norm());
    const double stop = tol * std::max(scale, 1e-300);

    for (int sweep = 0; sweep < max_sweeps && off_diag_norm() > stop; ++sweep) {
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen out;
    out.eigenvalues.resize(n);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<double> diag(n);
    for (size_t i = 0; i < n; ++i) diag[i] = a.at(i, i);
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return diag[x] > diag[y]; });

    out.eigenvectors = Matrix(n, n);
    for (size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = diag[order[j]];
        for (size_t i = 0; i < n; ++i) out.eigenvectors.at(i, j) = v.at(i, order[j]);
    }
    return out;
}

Matrix symmetric_pinv(const Matrix& m, double cutoff_ratio) {
    const SymmetricEigen eig = symmetric_eigen(m);
    const size_t n = m.rows;
    double max_eig = 0.0;
    for (double w : eig.eigenvalues) max_eig = std::max(max_eig, std::abs(w));
    const double cutoff = cutoff_ratio * max_eig;

    Matrix out(n, n);
    for (size_t k = 0; k < n; ++k) {
        const double w = eig.eigenvalues[k];
        if (std::abs(w) <= cutoff || w == 0.0) continue;
        const double inv = 1.0 / w;
        for (size_t i = 0; i < n; ++i) {
            const double vik = eig.eigenvectors.at(i, k);
            if (vik == 0.0) continue;
            for (size_t j = 0; j < n; ++j) {
                out.at(i, j) += inv * vik * eig.eigenvectors.at(j, k);
            }
        }
    }
    // Round-off can leave the reconstruction asymmetric in the last ulp.
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (out.at(i, j) + out.at(j, i));
            out.at(i, j) = avg;
            out.at(j, i) = avg;
        }
    }
    return out;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
    if (m.cols != v.size()) fail(ErrorCode::dimension_mismatch, "matvec: size mismatch");
    std::vector<double> out(m.rows, 0.0);
    for (size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < m.cols; ++j) acc += m.at(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

} // namespace oscd
