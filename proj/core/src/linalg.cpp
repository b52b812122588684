#include "watsonmle/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "watsonmle/errors.hpp"

namespace watsonmle {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("ragged row list");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

void Matrix::append_rows(const Matrix& other) {
  if (empty()) {
    *this = other;
    return;
  }
  if (other.cols_ != cols_) throw std::invalid_argument("column count mismatch in append_rows");
  data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  rows_ += other.rows_;
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

std::vector<std::size_t> non_unit_rows(const Matrix& X) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (!(std::abs(norm(X.row(i)) - 1.0) <= kUnitNormTolerance)) bad.push_back(i);
  }
  return bad;
}

void require_unit_rows(const Matrix& X) {
  const auto bad = non_unit_rows(X);
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << "rows are not unit-norm:";
  const std::size_t shown = std::min<std::size_t>(bad.size(), 20);
  for (std::size_t k = 0; k < shown; ++k) msg << ' ' << bad[k];
  if (bad.size() > shown) msg << " ... (" << bad.size() << " rows)";
  throw DomainError(msg.str());
}

ScatterMatrix scatter(const Matrix& X, std::span<const double> weights) {
  if (X.rows() == 0) throw DomainError("scatter of an empty data matrix");
  if (!weights.empty() && weights.size() != X.rows()) {
    throw DomainError("weight count does not match row count");
  }
  require_unit_rows(X);

  const std::size_t p = X.cols();
  Matrix S(p, p);
  double total = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
    if (w == 0.0) continue;
    total += w;
    const auto x = X.row(i);
    for (std::size_t r = 0; r < p; ++r) {
      const double wr = w * x[r];
      for (std::size_t c = r; c < p; ++c) S(r, c) += wr * x[c];
    }
  }
  if (!(total > 0.0)) throw DomainError("scatter weights sum to zero (empty cluster)");
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = r; c < p; ++c) {
      S(r, c) /= total;
      S(c, r) = S(r, c);
    }
  }
  return {std::move(S)};
}

EigDecomposition sym_eig(const Matrix& S, const JacobiControls& ctl) {
  const std::size_t n = S.rows();
  if (S.cols() != n) throw DomainError("sym_eig needs a square matrix");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double scale = std::max({std::abs(S(i, j)), std::abs(S(j, i)), 1.0});
      if (std::abs(S(i, j) - S(j, i)) > 1e-12 * scale) throw DomainError("sym_eig needs a symmetric matrix");
    }
  }

  Matrix A = S;
  Matrix V = Matrix::identity(n);

  double frob = 0.0;
  for (double v : A.data()) frob += v * v;
  frob = std::sqrt(frob);
  const double threshold = ctl.relative_off_tolerance * frob;

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += A(i, j) * A(i, j);
    return std::sqrt(acc);
  };

  double off = off_norm();
  int sweep = 0;
  while (off > threshold) {
    if (sweep++ >= ctl.max_sweeps) {
      std::ostringstream msg;
      msg << "Jacobi eigensolver did not converge in " << ctl.max_sweeps
          << " sweeps (off-diagonal norm " << off << ")";
      throw EigenConvergenceError(msg.str(), off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;

        A(p, p) -= t * apq;
        A(q, q) += t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = A(p, k) = cs * akp - sn * akq;
          A(k, q) = A(q, k) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = cs * vkp - sn * vkq;
          V(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return A(i, i) > A(j, j); });

  EigDecomposition out;
  out.values.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t idx : order) {
    out.values.push_back(A(idx, idx));
    Vector v(n);
    std::size_t lead = 0;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = V(k, idx);
      if (std::abs(v[k]) > std::abs(v[lead])) lead = k;
    }
    // Unit-normalize against accumulated rotation drift, then fix the sign.
    const double len = norm(v);
    const double sign = v[lead] < 0.0 ? -1.0 : 1.0;
    for (double& e : v) e *= sign / len;
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace watsonmle
