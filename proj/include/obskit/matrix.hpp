/**
 * @file matrix.hpp
 * @brief Dense row-major matrix of expressions.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "obskit/expr.hpp"

namespace obskit {

/// Row-major dense symbolic matrix. Entries default to the zero expression.
class ExprMatrix {
  public:
    ExprMatrix() = default;
    ExprMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, zero()) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Expr &at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    Expr at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    /// Append one row (must match cols(); sets cols() on a fresh matrix).
    void append_row(const std::vector<Expr> &row) {
        if (rows_ == 0 && cols_ == 0) cols_ = row.size();
        entries_.insert(entries_.end(), row.begin(), row.end());
        ++rows_;
    }

    std::vector<Expr> row(std::size_t r) const {
        return {entries_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                entries_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
    }

    const std::vector<Expr> &data() const { return entries_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Expr> entries_;
};

} // namespace obskit
