#pragma once

// Minimal dense linear algebra for the Mahalanobis model: a square matrix
// stored row-major, cyclic Jacobi eigendecomposition for symmetric matrices,
// and the eigenvalue-cutoff pseudo-inverse built on it.

#include <cstddef>
#include <span>
#include <vector>

namespace oscd {

struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data; // row-major

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }

    static Matrix identity(size_t n);
};

struct SymmetricEigen {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // columns aligned with eigenvalues
};

// Cyclic Jacobi sweeps until off-diagonal mass is negligible. Input must be
// symmetric; dies with invalid_value otherwise.
SymmetricEigen symmetric_eigen(const Matrix& m, double tol = 1e-14, int max_sweeps = 64);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix: eigenvalues below
// cutoff_ratio * max_eigenvalue are treated as zero.
Matrix symmetric_pinv(const Matrix& m, double cutoff_ratio = 1e-10);

std::vector<double> matvec(const Matrix& m, std::span<const double> v);

// max |a(i,j) - a(j,i)| relative to the largest absolute entry.
double symmetry_gap(const Matrix& m);

} // namespace oscd
