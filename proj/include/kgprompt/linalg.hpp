#pragma once

// Minimal row-major dense containers. All arithmetic goes through the
// dispatched kernels in kernels.hpp.

#include <cstddef>
#include <span>
#include <vector>

namespace kgprompt {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<Vector>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() noexcept { return data_; }
    std::span<const double> flat() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);
// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);

// A x
Vector matvec(const Matrix& a, std::span<const double> x);
// y += A^T x
void matvec_t_acc(const Matrix& a, std::span<const double> x, std::span<double> y);
// A += alpha x y^T
void add_outer(Matrix& a, double alpha, std::span<const double> x, std::span<const double> y);

// Cosine similarity; zero if either vector has zero norm.
double cosine(std::span<const double> x, std::span<const double> y);

}  // namespace kgprompt
