#include "msdflow/rat_matrix.hpp"

#include <stdexcept>

namespace msdflow {

RatMatrix RatMatrix::identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = Rational(1);
    return m;
}

RatMatrix RatMatrix::diagonal(const std::vector<Rational>& d) {
    RatMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
    return m;
}

RatMatrix RatMatrix::operator+(const RatMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RatMatrix: shape mismatch");
    RatMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = entries_[i] + o.entries_[i];
    return r;
}

RatMatrix RatMatrix::operator-(const RatMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("RatMatrix: shape mismatch");
    RatMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = entries_[i] - o.entries_[i];
    return r;
}

RatMatrix RatMatrix::operator*(const RatMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("RatMatrix: shape mismatch");
    RatMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const Rational& a = at(i, k);
            if (a.is_zero()) continue;
            for (std::size_t j = 0; j < o.cols_; ++j) {
                if (o.at(k, j).is_zero()) continue;
                r.at(i, j) += a * o.at(k, j);
            }
        }
    }
    return r;
}

RatMatrix RatMatrix::scaled(const Rational& s) const {
    RatMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = entries_[i] * s;
    return r;
}

RatMatrix RatMatrix::transpose() const {
    RatMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

bool RatMatrix::operator==(const RatMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && entries_ == o.entries_;
}

bool RatMatrix::is_zero() const {
    for (const auto& e : entries_)
        if (!e.is_zero()) return false;
    return true;
}

bool RatMatrix::is_identity() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            if (at(i, j) != (i == j ? Rational(1) : Rational(0))) return false;
    return true;
}

bool RatMatrix::is_antisymmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            if (at(i, j) + at(j, i) != Rational(0)) return false;
    return true;
}

Rational RatMatrix::trace() const {
    Rational t;
    for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += at(i, i);
    return t;
}

Rational RatMatrix::determinant() const {
    if (rows_ != cols_) throw std::invalid_argument("RatMatrix: determinant of non-square");
    RatMatrix a = *this;
    Rational det(1);
    for (std::size_t col = 0; col < cols_; ++col) {
        std::size_t pivot = col;
        while (pivot < rows_ && a.at(pivot, col).is_zero()) ++pivot;
        if (pivot == rows_) return Rational(0);
        if (pivot != col) {
            for (std::size_t j = 0; j < cols_; ++j) std::swap(a.at(pivot, j), a.at(col, j));
            det = -det;
        }
        det *= a.at(col, col);
        Rational inv_p = Rational(1) / a.at(col, col);
        for (std::size_t i = col + 1; i < rows_; ++i) {
            if (a.at(i, col).is_zero()) continue;
            Rational f = a.at(i, col) * inv_p;
            for (std::size_t j = col; j < cols_; ++j) a.at(i, j) -= f * a.at(col, j);
        }
    }
    return det;
}

RatMatrix RatMatrix::inverse() const {
    if (rows_ != cols_) throw std::invalid_argument("RatMatrix: inverse of non-square");
    std::size_t n = rows_;
    RatMatrix a = *this;
    RatMatrix inv = identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a.at(pivot, col).is_zero()) ++pivot;
        if (pivot == n) throw std::domain_error("RatMatrix: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a.at(pivot, j), a.at(col, j));
                std::swap(inv.at(pivot, j), inv.at(col, j));
            }
        }
        Rational inv_p = Rational(1) / a.at(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a.at(col, j) *= inv_p;
            inv.at(col, j) *= inv_p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a.at(i, col).is_zero()) continue;
            Rational f = a.at(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a.at(i, j) -= f * a.at(col, j);
                inv.at(i, j) -= f * inv.at(col, j);
            }
        }
    }
    return inv;
}

std::vector<std::vector<double>> RatMatrix::to_double() const {
    std::vector<std::vector<double>> r(rows_, std::vector<double>(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r[i][j] = at(i, j).to_double();
    return r;
}

}  // namespace msdflow
