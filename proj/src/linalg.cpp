#include "kgprompt/linalg.hpp"

#include <cassert>
#include <cmath>

#include "kgprompt/error.hpp"
#include "kgprompt/kernels.hpp"

namespace kgprompt {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) {
            throw Error(ErrorKind::DimensionMismatch, "ragged rows in Matrix::from_rows");
        }
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return kernels::active().dot(x.data(), y.data(), x.size());
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    kernels::active().axpy(a, x.data(), y.data(), x.size());
}

void scale(std::span<double> x, double a) {
    for (double& v : x) v *= a;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        throw Error(ErrorKind::DimensionMismatch, "matvec: matrix has " + std::to_string(a.cols()) +
                                                      " columns, vector has " + std::to_string(x.size()));
    }
    Vector y(a.rows());
    kernels::active().gemv(a.flat().data(), a.rows(), a.cols(), x.data(), y.data());
    return y;
}

void matvec_t_acc(const Matrix& a, std::span<const double> x, std::span<double> y) {
    assert(a.rows() == x.size() && a.cols() == y.size());
    kernels::active().gemv_t_acc(a.flat().data(), a.rows(), a.cols(), x.data(), y.data());
}

void add_outer(Matrix& a, double alpha, std::span<const double> x, std::span<const double> y) {
    assert(a.rows() == x.size() && a.cols() == y.size());
    kernels::active().ger(alpha, x.data(), x.size(), y.data(), y.size(), a.flat().data());
}

double cosine(std::span<const double> x, std::span<const double> y) {
    const double nx = norm(x);
    const double ny = norm(y);
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return dot(x, y) / (nx * ny);
}

}  // namespace kgprompt
