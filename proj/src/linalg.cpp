#include "strata/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strata/error.hpp"

namespace strata {

namespace {

void require_square(const Matrix& m) {
    if (m.rows != m.cols || m.rows == 0) {
        raise(ErrorCode::dimension, "expected a non-empty square matrix");
    }
}

}  // namespace

void symmetric_eigen(const Matrix& m, std::vector<double>& values, Matrix& vectors) {
    require_square(m);
    const int k = m.rows;
    Matrix a = m;
    vectors = Matrix(k, k);
    for (int i = 0; i < k; ++i) vectors.at(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < k; ++p) {
            for (int q = p + 1; q < k; ++q) off += a.at(p, q) * a.at(p, q);
        }
        if (off < 1e-300) break;
        for (int p = 0; p < k; ++p) {
            for (int q = p + 1; q < k; ++q) {
                double apq = a.at(p, q);
                if (apq == 0.0) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int i = 0; i < k; ++i) {
                    double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < k; ++i) {
                    double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < k; ++i) {
                    double vip = vectors.at(i, p), viq = vectors.at(i, q);
                    vectors.at(i, p) = c * vip - s * viq;
                    vectors.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    values.resize(k);
    for (int i = 0; i < k; ++i) values[i] = a.at(i, i);
    // sort ascending, permuting eigenvector columns alongside
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return values[x] < values[y]; });
    std::vector<double> sorted_vals(k);
    Matrix sorted_vecs(k, k);
    for (int c = 0; c < k; ++c) {
        sorted_vals[c] = values[order[c]];
        for (int r = 0; r < k; ++r) sorted_vecs.at(r, c) = vectors.at(r, order[c]);
    }
    values = std::move(sorted_vals);
    vectors = std::move(sorted_vecs);
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    std::vector<double> values;
    Matrix vectors;
    symmetric_eigen(m, values, vectors);
    return values;
}

double min_eigenvalue(const Matrix& m) {
    return symmetric_eigenvalues(m).front();
}

Matrix symmetric_inverse_sqrt(const Matrix& m, double min_eig_floor) {
    std::vector<double> values;
    Matrix vectors;
    symmetric_eigen(m, values, vectors);
    if (values.front() <= min_eig_floor) {
        raise(ErrorCode::singular, "matrix not positive definite: min eigenvalue " +
                                       std::to_string(values.front()));
    }
    const int k = m.rows;
    Matrix out(k, k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) {
                acc += vectors.at(r, i) * vectors.at(c, i) / std::sqrt(values[i]);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

namespace {

Matrix cholesky(const Matrix& m) {
    const int k = m.rows;
    Matrix l(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = m.at(i, j);
            for (int p = 0; p < j; ++p) sum -= l.at(i, p) * l.at(j, p);
            if (i == j) {
                if (sum <= 0.0) {
                    raise(ErrorCode::singular, "matrix not positive definite");
                }
                l.at(i, i) = std::sqrt(sum);
            } else {
                l.at(i, j) = sum / l.at(j, j);
            }
        }
    }
    return l;
}

}  // namespace

std::vector<double> spd_solve(const Matrix& m, std::span<const double> b, double min_eig_floor) {
    require_square(m);
    if (static_cast<int>(b.size()) != m.rows) {
        raise(ErrorCode::dimension, "spd_solve: dimension mismatch");
    }
    double lmin = min_eigenvalue(m);
    if (lmin <= min_eig_floor) {
        raise(ErrorCode::singular,
              "singular covariance: min eigenvalue " + std::to_string(lmin) +
                  " at or below floor " + std::to_string(min_eig_floor));
    }
    Matrix l = cholesky(m);
    const int k = m.rows;
    std::vector<double> y(k), x(k);
    for (int i = 0; i < k; ++i) {
        double sum = b[i];
        for (int p = 0; p < i; ++p) sum -= l.at(i, p) * y[p];
        y[i] = sum / l.at(i, i);
    }
    for (int i = k - 1; i >= 0; --i) {
        double sum = y[i];
        for (int p = i + 1; p < k; ++p) sum -= l.at(p, i) * x[p];
        x[i] = sum / l.at(i, i);
    }
    return x;
}

double spd_quadratic_form(const Matrix& m, std::span<const double> b, double min_eig_floor) {
    std::vector<double> x = spd_solve(m, b, min_eig_floor);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += b[i] * x[i];
    return acc;
}

}  // namespace strata
