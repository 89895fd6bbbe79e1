// Test pencils: diagonal spectra, finite-difference Laplacians, Matrix Market files.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"

namespace pgeig {

/// Mass matrix paired with the Laplacian stiffness.
enum class MassKind {
  identity,  // B = I
  fem,       // linear-element mass, tridiag(1, 4, 1) / 6 per direction
};

/// A = diag(lambdas), B = I, spectrum attached. Needs at least three entries.
inline SymmetricPencil diagonal_problem(std::span<const double> lambdas) {
  if (lambdas.size() < 3) throw DomainError("diagonal problem needs n >= 3");
  Vector d = Eigen::Map<const Vector>(lambdas.data(), static_cast<Eigen::Index>(lambdas.size()));
  for (double v : lambdas)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("diagonal problem: entries must be positive");
  Vector sorted = d;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const Eigen::Index n = d.size();
  return SymmetricPencil(Matrix(d.asDiagonal()), Matrix::Identity(n, n))
      .with_spectrum(Spectrum::from_lambdas(sorted));
}

namespace detail {

inline Matrix second_difference(int n) {
  Matrix t = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    t(i, i) = 2.0;
    if (i + 1 < n) t(i, i + 1) = t(i + 1, i) = -1.0;
  }
  return t;
}

inline Matrix linear_mass(int n) {
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 4.0 / 6.0;
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = 1.0 / 6.0;
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

}  // namespace detail

/// Dirichlet Laplacian on (0,1) with n interior nodes: A = tridiag(-1,2,-1) / h^2.
///
/// h defaults to 1/(n+1); the smallest eigenvalue with B = I is then
/// 4 sin^2(pi h / 2) / h^2.
inline SymmetricPencil laplacian1d(int n, MassKind mass = MassKind::identity, double h = 0.0) {
  if (n < 2) throw DomainError("laplacian1d: need n >= 2");
  if (h == 0.0) h = 1.0 / (n + 1);
  if (!(h > 0.0)) throw DomainError("laplacian1d: h must be positive");
  Matrix a = detail::second_difference(n) / (h * h);
  Matrix b = mass == MassKind::identity ? Matrix(Matrix::Identity(n, n)) : detail::linear_mass(n);
  return SymmetricPencil(std::move(a), std::move(b));
}

/// Five-point Laplacian on the unit square, nx * ny interior nodes, x-index fastest.
inline SymmetricPencil laplacian2d(int nx, int ny, MassKind mass = MassKind::identity) {
  if (nx < 2 || ny < 2) throw DomainError("laplacian2d: grid sizes must be >= 2");
  const double hx = 1.0 / (nx + 1);
  const double hy = 1.0 / (ny + 1);
  const Matrix tx = detail::second_difference(nx) / (hx * hx);
  const Matrix ty = detail::second_difference(ny) / (hy * hy);
  const Matrix ix = Matrix::Identity(nx, nx);
  const Matrix iy = Matrix::Identity(ny, ny);
  if (mass == MassKind::identity)
    return SymmetricPencil(detail::kron(iy, tx) + detail::kron(ty, ix), Matrix::Identity(nx * ny, nx * ny));
  const Matrix mx = detail::linear_mass(nx);
  const Matrix my = detail::linear_mass(ny);
  return SymmetricPencil(detail::kron(my, tx) + detail::kron(ty, mx), detail::kron(my, mx));
}

// ---------------------------------------------------------------------------
// Matrix Market: real symmetric coordinate format only.

namespace detail {

inline std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

/// Reads a full symmetric matrix from a `%%MatrixMarket matrix coordinate real symmetric` stream.
///
/// Only the lower triangle may be stored. Errors carry the 1-based line number.
inline Matrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(0, "empty Matrix Market input");
  ++lineno;
  {
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError(lineno, "missing %%MatrixMarket banner");
    if (detail::lowercase(object) != "matrix") throw ParseError(lineno, "object must be 'matrix'");
    if (detail::lowercase(format) != "coordinate")
      throw ParseError(lineno, "only coordinate format is supported, got '" + format + "'");
    if (detail::lowercase(field) != "real" && detail::lowercase(field) != "double")
      throw ParseError(lineno, "only real fields are supported, got '" + field + "'");
    if (detail::lowercase(symmetry) != "symmetric")
      throw ParseError(lineno, "matrix must be declared symmetric, got '" + symmetry + "'");
  }

  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line) || line[0] == '%') continue;
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
      throw ParseError(lineno, "malformed size line");
    std::string extra;
    if (size_line >> extra) throw ParseError(lineno, "trailing data on size line");
    break;
  }
  if (rows < 0) throw ParseError(lineno, "missing size line");
  if (rows != cols) throw ParseError(lineno, "symmetric matrix must be square");

  Matrix m = Matrix::Zero(rows, cols);
  long seen = 0;
  while (seen < nnz && std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    long i = 0, j = 0;
    double value = 0.0;
    if (!(entry >> i >> j >> value)) throw ParseError(lineno, "malformed entry");
    std::string extra;
    if (entry >> extra) throw ParseError(lineno, "trailing data in entry");
    if (i < 1 || j < 1 || i > rows || j > cols) throw ParseError(lineno, "index out of range");
    if (j > i) throw ParseError(lineno, "upper-triangle entry in symmetric storage");
    if (!std::isfinite(value)) throw ParseError(lineno, "non-finite value");
    m(i - 1, j - 1) += value;
    if (i != j) m(j - 1, i - 1) += value;
    ++seen;
  }
  if (seen < nnz)
    throw ParseError(lineno, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen));
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::blank(line) && line[0] != '%') throw ParseError(lineno, "data after last entry");
  }
  return m;
}

inline Matrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  try {
    return read_matrix_market(in);
  } catch (const ParseError& e) {
    throw e.in_source(path);
  }
}

/// Writes the lower triangle of a symmetric matrix. Values round-trip exactly.
inline void write_matrix_market(std::ostream& out, const Matrix& m) {
  if (m.rows() != m.cols() || m != m.transpose())
    throw DomainError("write_matrix_market: matrix must be square and symmetric");
  long nnz = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i)
      if (m(i, j) != 0.0) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i)
      if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << m(i, j) << '\n';
}

inline void write_matrix_market(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ParseError(0, "cannot open '" + path + "' for writing");
  write_matrix_market(out, m);
}

inline SymmetricPencil matrix_market_pencil(const std::string& a_path, const std::string& b_path) {
  return SymmetricPencil(read_matrix_market(a_path), read_matrix_market(b_path));
}

}  // namespace pgeig
