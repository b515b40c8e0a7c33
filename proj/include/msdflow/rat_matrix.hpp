#pragma once

#include <cstddef>
#include <vector>

#include "msdflow/rational.hpp"

namespace msdflow {

// Dense matrix of exact rationals, row-major.
class RatMatrix {
  public:
    RatMatrix() = default;
    RatMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols) {}

    static RatMatrix identity(std::size_t n);
    static RatMatrix diagonal(const std::vector<Rational>& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const Rational& at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    RatMatrix operator+(const RatMatrix& o) const;
    RatMatrix operator-(const RatMatrix& o) const;
    RatMatrix operator*(const RatMatrix& o) const;
    RatMatrix scaled(const Rational& s) const;
    RatMatrix transpose() const;

    bool operator==(const RatMatrix& o) const;
    bool is_zero() const;
    bool is_identity() const;
    bool is_antisymmetric() const;

    Rational trace() const;
    Rational determinant() const;
    // Exact Gauss-Jordan inverse; throws std::domain_error on singular input.
    RatMatrix inverse() const;

    std::vector<std::vector<double>> to_double() const;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> entries_;
};

}  // namespace msdflow
