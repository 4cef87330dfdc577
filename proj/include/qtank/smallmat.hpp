#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtank::smallmat {

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroPolynomial : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotSymmetric : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotStable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix for the small systems handled here (state dimension
/// at most 8). All entries are checked finite on construction.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> init);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator*(double scalar) const;
    Matrix operator-() const;

    Matrix transpose() const;
    double trace() const;

    /// Largest absolute entry.
    double max_norm() const;
    double frobenius_norm() const;

    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& m);

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(double scalar, const Matrix& m);

/// Real polynomial with coefficients ordered highest degree -> constant term.
/// The leading coefficient is nonzero unless the polynomial is identically zero.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);

    std::size_t degree() const { return coeffs_.size() - 1; }
    bool is_zero() const;

    /// Coefficient of s^power (zero when power exceeds the degree).
    double coeff(std::size_t power) const;
    const std::vector<double>& coefficients() const { return coeffs_; }

    double eval(double s) const;
    std::complex<double> eval(std::complex<double> s) const;
    /// Matrix polynomial p(a) by Horner's scheme; a must be square.
    Matrix eval(const Matrix& a) const;

private:
    std::vector<double> coeffs_;
};

/// Solves a X = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-12 * max|a|.
Matrix lin_solve(const Matrix& a, const Matrix& b);

/// Monic characteristic polynomial det(sI - a) via the Faddeev-LeVerrier
/// recursion. Restricted to n <= 8.
Polynomial char_poly(const Matrix& a);

/// True iff all roots of p lie strictly in the open left half-plane, decided
/// by the Routh-Hurwitz array. A zero (or sign-flipped) first column element
/// counts as unstable/marginal.
bool is_hurwitz(const Polynomial& p);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Requires max|a - a^T| <= 1e-9 and n <= 8.
std::vector<double> sym_eigenvalues(const Matrix& a);

/// Solves f^T M + M f = -q for symmetric M via the n^2 x n^2 vectorized
/// system; the result is symmetrized as (M + M^T)/2. Throws NotStable when
/// the vectorized system is singular (f has an eigenvalue pair summing to 0).
Matrix lyap_solve(const Matrix& f, const Matrix& q);

/// Induced 2-norm, computed as sqrt(max eigenvalue of x^T x).
double spectral_norm(const Matrix& x);

} // namespace qtank::smallmat
