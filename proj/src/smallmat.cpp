#include "qtank/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace qtank::smallmat {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

constexpr std::size_t kMaxDim = 8;

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Matrix: entries length != rows * cols");
    }
    require_finite(*this, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
        if (row.size() != cols_) {
            throw std::invalid_argument("Matrix: ragged initializer");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
    require_finite(*this, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::operator+(const Matrix& rhs) const {
    require_same_shape(*this, rhs, "Matrix::operator+");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out.data_[i] = data_[i] + rhs.data_[i];
    }
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    require_same_shape(*this, rhs, "Matrix::operator-");
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out.data_[i] = data_[i] - rhs.data_[i];
    }
    return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) {
        throw std::invalid_argument("Matrix::operator*: inner dimension mismatch");
    }
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double aik = data_[i * cols_ + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) {
                out.data_[i * rhs.cols_ + j] += aik * rhs.data_[k * rhs.cols_ + j];
            }
        }
    }
    return out;
}

Matrix Matrix::operator*(double scalar) const {
    Matrix out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        out.data_[i] = data_[i] * scalar;
    }
    return out;
}

Matrix Matrix::operator-() const { return (*this) * -1.0; }

Matrix operator*(double scalar, const Matrix& m) { return m * scalar; }

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            out(j, i) = (*this)(i, j);
        }
    }
    return out;
}

double Matrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) {
        t += (*this)(i, i);
    }
    return t;
}

double Matrix::max_norm() const {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) {
        s += v * v;
    }
    return std::sqrt(s);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) {
        throw std::invalid_argument("Matrix::block: out of range");
    }
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            out(i, j) = (*this)(r0 + i, c0 + j);
        }
    }
    return out;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& m) {
    if (r0 + m.rows() > rows_ || c0 + m.cols() > cols_) {
        throw std::invalid_argument("Matrix::set_block: out of range");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            (*this)(r0 + i, c0 + j) = m(i, j);
        }
    }
}

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        coeffs_ = {0.0};
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("Polynomial: non-finite coefficient");
        }
    }
    // keep the leading coefficient nonzero unless identically zero
    std::size_t lead = 0;
    while (lead + 1 < coeffs_.size() && coeffs_[lead] == 0.0) {
        ++lead;
    }
    coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
}

bool Polynomial::is_zero() const {
    return coeffs_.size() == 1 && coeffs_[0] == 0.0;
}

double Polynomial::coeff(std::size_t power) const {
    if (power > degree()) return 0.0;
    return coeffs_[coeffs_.size() - 1 - power];
}

double Polynomial::eval(double s) const {
    double acc = 0.0;
    for (double c : coeffs_) {
        acc = acc * s + c;
    }
    return acc;
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
    std::complex<double> acc = 0.0;
    for (double c : coeffs_) {
        acc = acc * s + c;
    }
    return acc;
}

Matrix Polynomial::eval(const Matrix& a) const {
    if (!a.is_square()) {
        throw std::invalid_argument("Polynomial::eval: matrix not square");
    }
    const std::size_t n = a.rows();
    Matrix acc(n, n);
    for (double c : coeffs_) {
        acc = acc * a + c * Matrix::identity(n);
    }
    return acc;
}

Matrix lin_solve(const Matrix& a, const Matrix& b) {
    if (!a.is_square()) {
        throw std::invalid_argument("lin_solve: a not square");
    }
    if (b.rows() != a.rows()) {
        throw std::invalid_argument("lin_solve: b row count mismatch");
    }
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    const double pivot_floor = 1e-12 * a.max_norm();
    if (a.max_norm() == 0.0) {
        throw SingularMatrix("lin_solve: zero matrix");
    }

    Matrix lhs = a;
    Matrix rhs = b;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(lhs(r, col)) > std::abs(lhs(piv, col))) {
                piv = r;
            }
        }
        if (std::abs(lhs(piv, col)) < pivot_floor) {
            throw SingularMatrix("lin_solve: pivot below threshold at column " +
                                 std::to_string(col));
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lhs(piv, j), lhs(col, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(rhs(piv, j), rhs(col, j));
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lhs(r, col) / lhs(col, col);
            if (f == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) lhs(r, j) -= f * lhs(col, j);
            for (std::size_t j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
        }
    }
    Matrix x(n, m);
    for (std::size_t col = 0; col < m; ++col) {
        for (std::size_t ri = n; ri-- > 0;) {
            double s = rhs(ri, col);
            for (std::size_t j = ri + 1; j < n; ++j) {
                s -= lhs(ri, j) * x(j, col);
            }
            x(ri, col) = s / lhs(ri, ri);
        }
    }
    return x;
}

Polynomial char_poly(const Matrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("char_poly: matrix not square");
    }
    const std::size_t n = a.rows();
    if (n > kMaxDim) {
        throw DimensionTooLarge("char_poly: n > 8");
    }
    // Faddeev-LeVerrier: M_1 = a, c_k = -tr(M_k)/k, M_{k+1} = a (M_k + c_k I).
    std::vector<double> coeffs(n + 1, 0.0);
    coeffs[0] = 1.0;
    Matrix mk = a;
    for (std::size_t k = 1; k <= n; ++k) {
        const double ck = -mk.trace() / static_cast<double>(k);
        coeffs[k] = ck;
        if (k < n) {
            mk = a * (mk + ck * Matrix::identity(n));
        }
    }
    return Polynomial(coeffs);
}

bool is_hurwitz(const Polynomial& p) {
    if (p.is_zero()) {
        throw ZeroPolynomial("is_hurwitz: zero polynomial");
    }
    const std::size_t n = p.degree();
    if (n == 0) return true; // no roots

    // normalize so the leading coefficient is positive
    std::vector<double> c = p.coefficients();
    if (c[0] < 0.0) {
        for (double& v : c) v = -v;
    }
    // necessary: every coefficient strictly positive
    for (double v : c) {
        if (v <= 0.0) return false;
    }

    // Routh array, two working rows
    std::vector<double> prev, cur;
    for (std::size_t i = 0; i < c.size(); i += 2) prev.push_back(c[i]);
    for (std::size_t i = 1; i < c.size(); i += 2) cur.push_back(c[i]);
    for (std::size_t row = 2; row <= n; ++row) {
        if (cur.empty() || cur[0] <= 0.0) return false;
        std::vector<double> next;
        const std::size_t len = prev.size() - 1;
        next.reserve(len);
        for (std::size_t j = 0; j < len; ++j) {
            const double a1 = j + 1 < prev.size() ? prev[j + 1] : 0.0;
            const double b1 = j + 1 < cur.size() ? cur[j + 1] : 0.0;
            next.push_back((cur[0] * a1 - prev[0] * b1) / cur[0]);
        }
        if (next.empty()) next.push_back(0.0);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur[0] > 0.0;
}

std::vector<double> sym_eigenvalues(const Matrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("sym_eigenvalues: matrix not square");
    }
    const std::size_t n = a.rows();
    if (n > kMaxDim) {
        throw DimensionTooLarge("sym_eigenvalues: n > 8");
    }
    if ((a - a.transpose()).max_norm() > 1e-9) {
        throw NotSymmetric("sym_eigenvalues: matrix not symmetric");
    }

    Matrix w = a;
    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j) s += w(i, j) * w(i, j);
            }
        }
        return std::sqrt(s);
    };

    // cyclic Jacobi sweeps; quadratic convergence makes a few dozen plenty
    for (int sweep = 0; sweep < 64 && off_norm() > 1e-12; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (apq == 0.0) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double cth = 1.0 / std::sqrt(t * t + 1.0);
                const double sth = t * cth;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p);
                    const double wkq = w(k, q);
                    w(k, p) = cth * wkp - sth * wkq;
                    w(k, q) = sth * wkp + cth * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k);
                    const double wqk = w(q, k);
                    w(p, k) = cth * wpk - sth * wqk;
                    w(q, k) = sth * wpk + cth * wqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) {
        eig[i] = w(i, i);
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

Matrix lyap_solve(const Matrix& f, const Matrix& q) {
    if (!f.is_square() || !q.is_square() || f.rows() != q.rows()) {
        throw std::invalid_argument("lyap_solve: dimension mismatch");
    }
    const std::size_t n = f.rows();
    if (n > kMaxDim) {
        throw DimensionTooLarge("lyap_solve: n > 8");
    }

    // equation (i,j): sum_k f(k,i) M(k,j) + sum_k M(i,k) f(k,j) = -q(i,j),
    // unknowns vec'd as u = p*n + r for M(p,r)
    const std::size_t nn = n * n;
    Matrix sys(nn, nn);
    Matrix rhs(nn, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t eq = i * n + j;
            for (std::size_t k = 0; k < n; ++k) {
                sys(eq, k * n + j) += f(k, i);
                sys(eq, i * n + k) += f(k, j);
            }
            rhs(eq, 0) = -q(i, j);
        }
    }

    Matrix vec(n, n);
    try {
        const Matrix sol = lin_solve(sys, rhs);
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = 0; r < n; ++r) {
                vec(p, r) = sol(p * n + r, 0);
            }
        }
    } catch (const SingularMatrix&) {
        throw NotStable("lyap_solve: f has an eigenvalue pair summing to zero");
    }
    return 0.5 * (vec + vec.transpose());
}

double spectral_norm(const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0) return 0.0;
    const Matrix gram = x.transpose() * x;
    const std::vector<double> eig = sym_eigenvalues(gram);
    return std::sqrt(std::max(0.0, eig.back()));
}

} // namespace qtank::smallmat
