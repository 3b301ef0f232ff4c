#pragma once

#include <span>
#include <vector>

namespace strata {

// Dense row-major matrix, sized for small instrument dimensions.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }
};

// Symmetric k x k helpers (k is small; direct dense algorithms throughout).

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

// Full eigendecomposition; eigenvectors returned column-wise.
void symmetric_eigen(const Matrix& m, std::vector<double>& values, Matrix& vectors);

double min_eigenvalue(const Matrix& m);

// Inverse square root of a symmetric positive-definite matrix.
Matrix symmetric_inverse_sqrt(const Matrix& m, double min_eig_floor);

// Solves m x = b for symmetric positive-definite m (Cholesky).
// Throws Error(singular) below the eigenvalue floor.
std::vector<double> spd_solve(const Matrix& m, std::span<const double> b, double min_eig_floor);

// Quadratic form b' m^{-1} b via the solver above.
double spd_quadratic_form(const Matrix& m, std::span<const double> b, double min_eig_floor);

}  // namespace strata
