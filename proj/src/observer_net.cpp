#include "qtank/observer_net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qtank::observer {

using smallmat::Matrix;
using smallmat::Polynomial;

namespace {

constexpr double kStructureTol = 1e-10;

// orthonormal projection residual, re-orthogonalized once
std::vector<double> project_out(const std::vector<std::vector<double>>& basis,
                                std::vector<double> v) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * q[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * q[i];
        }
    }
    return v;
}

double vec_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string describe_instability(const Matrix& f) {
    std::ostringstream os;
    os << "trace = " << f.trace();
    if (f.rows() == 2) {
        os << ", det = " << f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
    }
    return os.str();
}

struct ChainBasis {
    Matrix t;         // orthonormal, first `rank` columns span the observable rows
    std::size_t rank; // dimension of the observable subspace of (f, h)
};

// Gram-Schmidt over the observability rows h, hF, hF^2, ... in index order,
// then canonical completion. Rank decisions at 1e-9 on normalized rows.
ChainBasis observability_basis(const Matrix& f, const Matrix& h) {
    const std::size_t n = f.rows();
    const std::size_t p = h.rows();

    std::vector<std::vector<double>> basis;
    Matrix block = h;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t r = 0; r < p; ++r) {
            std::vector<double> row(n);
            for (std::size_t c = 0; c < n; ++c) row[c] = block(r, c);
            const double nr = vec_norm(row);
            if (nr == 0.0) continue;
            for (double& x : row) x /= nr;
            auto res = project_out(basis, std::move(row));
            const double rn = vec_norm(res);
            if (rn > 1e-9) {
                for (double& x : res) x /= rn;
                basis.push_back(std::move(res));
            }
        }
        block = block * f;
    }
    const std::size_t rank = basis.size();

    for (std::size_t i = 0; i < n && basis.size() < n; ++i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        auto res = project_out(basis, std::move(e));
        const double rn = vec_norm(res);
        if (rn > 1e-6) {
            for (double& x : res) x /= rn;
            basis.push_back(std::move(res));
        }
    }
    if (basis.size() != n) {
        throw std::logic_error("observability_basis: completion failed");
    }

    ChainBasis out{Matrix(n, n), rank};
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t r = 0; r < n; ++r) {
            out.t(r, col) = basis[col][r];
        }
    }
    return out;
}

Polynomial poly_from_poles(const std::vector<double>& poles) {
    std::vector<double> q{1.0};
    for (double pole : poles) {
        std::vector<double> next(q.size() + 1, 0.0);
        for (std::size_t i = 0; i < q.size(); ++i) {
            next[i] += q[i];
            next[i + 1] -= pole * q[i];
        }
        q = std::move(next);
    }
    return Polynomial(q);
}

// single-output Ackermann: the gain placing (f, h) at the roots of q
Matrix scalar_ackermann(const Matrix& f, const Matrix& h, const Polynomial& q) {
    const std::size_t n = f.rows();
    Matrix obs(n, n);
    Matrix blk = h;
    for (std::size_t k = 0; k < n; ++k) {
        obs.set_block(k, 0, blk);
        blk = blk * f;
    }
    Matrix rhs(n, 1);
    rhs(n - 1, 0) = 1.0;
    return q.eval(f) * smallmat::lin_solve(obs, rhs);
}

} // namespace

SensorGraph make_graph(std::size_t n_nodes,
                       const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    SensorGraph g;
    g.n_nodes = n_nodes;
    g.adjacency = Matrix(n_nodes, n_nodes);
    for (const auto& [i, j] : edges) {
        if (i >= n_nodes || j >= n_nodes) {
            throw std::invalid_argument("make_graph: edge endpoint out of range");
        }
        if (i == j) {
            throw std::invalid_argument("make_graph: self-loop not allowed");
        }
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
    }
    return g;
}

Matrix laplacian(const SensorGraph& g) {
    const std::size_t n = g.n_nodes;
    Matrix lap(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            deg += g.adjacency(i, j);
            lap(i, j) = -g.adjacency(i, j);
        }
        lap(i, i) = deg;
    }
    return lap;
}

double laplacian_lambda2(const SensorGraph& g) {
    if (g.n_nodes < 2) {
        throw std::invalid_argument("laplacian_lambda2: need at least 2 nodes");
    }
    const auto eig = smallmat::sym_eigenvalues(laplacian(g));
    const double lambda2 = eig[1];
    if (lambda2 <= 1e-9) {
        throw DisconnectedGraph("laplacian_lambda2: graph is disconnected");
    }
    return lambda2;
}

NodeDecomposition decompose(const plant::LinearModel& model, const Matrix& h_row) {
    const Matrix& a = model.a_mat;
    const std::size_t n = a.rows();
    const std::size_t p = h_row.rows();
    if (h_row.cols() != n || h_row.max_norm() == 0.0) {
        throw std::invalid_argument("decompose: h_row empty or wrong width");
    }

    const ChainBasis chain = observability_basis(a, h_row);
    const std::size_t rank = chain.rank;

    NodeDecomposition d;
    d.sigma = n - rank;
    d.basis = chain.t;

    const Matrix at = d.basis.transpose() * a * d.basis;
    const Matrix ht = h_row * d.basis;
    if ((d.basis.transpose() * d.basis - Matrix::identity(n)).max_norm() > kStructureTol ||
        at.block(0, rank, rank, d.sigma).max_norm() > kStructureTol ||
        ht.block(0, rank, p, d.sigma).max_norm() > kStructureTol) {
        throw std::logic_error("decompose: block structure residual exceeds tolerance");
    }

    d.a_d = at.block(0, 0, rank, rank);
    d.a_r = at.block(rank, 0, d.sigma, rank);
    d.a_u = at.block(rank, rank, d.sigma, d.sigma);
    d.h_d = ht.block(0, 0, p, rank);

    if (d.sigma > 0 && !smallmat::is_hurwitz(smallmat::char_poly(d.a_u))) {
        throw NotDetectable("decompose: unobservable block is not Hurwitz (" +
                            describe_instability(d.a_u) + ")");
    }
    return d;
}

smallmat::Matrix validate_or_design_lid(const NodeDecomposition& d,
                                        const std::optional<Matrix>& l_d_given,
                                        const std::vector<double>& poles) {
    const std::size_t r = d.a_d.rows();
    const std::size_t p = d.h_d.rows();

    if (l_d_given) {
        if (l_d_given->rows() != r || l_d_given->cols() != p) {
            throw std::invalid_argument("validate_or_design_lid: gain shape mismatch");
        }
        const Matrix f = d.a_d - (*l_d_given) * d.h_d;
        if (!smallmat::is_hurwitz(smallmat::char_poly(f))) {
            throw NotHurwitz("a_d - l_d h_d is not Hurwitz (" + describe_instability(f) + ")");
        }
        return *l_d_given;
    }

    std::vector<double> target = poles;
    if (target.empty()) {
        for (std::size_t i = 0; i < r; ++i) target.push_back(-1.0 - static_cast<double>(i));
    }
    if (target.size() != r) {
        throw std::invalid_argument("validate_or_design_lid: need one pole per observable state");
    }

    // sequential scalarized placement: each output row places the poles of
    // its own observable chain (the chain's dynamics close on themselves, so
    // a single-row Ackermann inside the chain is exact)
    Matrix l_d(r, p);
    Matrix acc = d.a_d;
    std::size_t consumed = 0;
    for (std::size_t row = 0; row < p && consumed < r; ++row) {
        const Matrix h_j = d.h_d.block(row, 0, 1, r);
        if (h_j.max_norm() == 0.0) continue;
        const ChainBasis chain = observability_basis(acc, h_j);
        const std::size_t rj = chain.rank;
        if (rj == 0 || rj > r - consumed) continue; // overlapping chains: leave to the check below
        const Matrix f_sub = (chain.t.transpose() * acc * chain.t).block(0, 0, rj, rj);
        const Matrix h_sub = (h_j * chain.t).block(0, 0, 1, rj);
        const std::vector<double> sub_poles(target.begin() + consumed,
                                            target.begin() + consumed + rj);
        Matrix l_sub;
        try {
            l_sub = scalar_ackermann(f_sub, h_sub, poly_from_poles(sub_poles));
        } catch (const smallmat::SingularMatrix&) {
            continue;
        }
        Matrix padded(r, 1);
        padded.set_block(0, 0, l_sub);
        const Matrix l_col = chain.t * padded;
        l_d.set_block(0, row, l_col);
        acc = acc - l_col * h_j;
        consumed += rj;
    }

    const Matrix f_closed = d.a_d - l_d * d.h_d;
    if (p == 1) {
        const Polynomial desired = poly_from_poles(target);
        const Polynomial got = smallmat::char_poly(f_closed);
        for (std::size_t i = 0; i <= r; ++i) {
            if (std::abs(got.coeff(i) - desired.coeff(i)) > 1e-6) {
                throw PlacementFailed("validate_or_design_lid: poles not placed");
            }
        }
        return l_d;
    }
    if (consumed != r || !smallmat::is_hurwitz(smallmat::char_poly(f_closed))) {
        throw PlacementFailed("validate_or_design_lid: row chains do not cover the "
                              "observable states");
    }
    return l_d;
}

smallmat::Matrix solve_weighting(const NodeDecomposition& d, const Matrix& l_d) {
    const Matrix f = d.a_d - l_d * d.h_d;
    const std::size_t r = f.rows();
    const Matrix m = smallmat::lyap_solve(f, Matrix::identity(r));
    const Matrix resid = f.transpose() * m + m * f + Matrix::identity(r);
    if (resid.max_norm() > 1e-9) {
        throw smallmat::NotStable("solve_weighting: Lyapunov residual exceeds 1e-9");
    }
    const auto eig = smallmat::sym_eigenvalues(m);
    if (eig.front() <= 0.0) {
        throw smallmat::NotStable("solve_weighting: weighting block not positive definite");
    }
    return m;
}

FullGains assemble_full_gains(const NodeDecomposition& d, const Matrix& l_d, const Matrix& m_d,
                              double k_weight) {
    if (k_weight < 1.0) {
        throw std::invalid_argument("assemble_full_gains: k_weight must be >= 1");
    }
    const std::size_t n = d.basis.rows();
    const std::size_t r = d.a_d.rows();
    const std::size_t p = d.h_d.rows();

    Matrix padded(n, p);
    padded.set_block(0, 0, l_d);

    Matrix inner_inv = Matrix::identity(n);
    if (r > 0) {
        inner_inv.set_block(0, 0, smallmat::lin_solve(k_weight * m_d, Matrix::identity(r)));
    }

    FullGains g;
    g.l_full = d.basis * padded;
    g.m_full_inv = d.basis * inner_inv * d.basis.transpose();
    return g;
}

GainCondition check_gain_condition(const std::vector<NodeObserverDesign>& designs,
                                   const SensorGraph& graph, double gamma_coupling,
                                   double eps_bar) {
    if (eps_bar <= 0.0 || eps_bar > std::sqrt(2.0)) {
        throw std::invalid_argument("check_gain_condition: eps_bar must lie in (0, sqrt(2)]");
    }
    if (designs.size() != graph.n_nodes) {
        throw std::invalid_argument("check_gain_condition: designs/graph size mismatch");
    }

    GainCondition gc;
    gc.gamma_coupling = gamma_coupling;
    gc.eps_bar = eps_bar;
    gc.theta = 0.5 * (1.0 - std::pow(1.0 - eps_bar * eps_bar / 2.0, 2));
    gc.lambda2 = laplacian_lambda2(graph);

    for (const auto& dn : designs) {
        const double nr = smallmat::spectral_norm(dn.decomp.a_r);
        const double nu = smallmat::spectral_norm(dn.decomp.a_u.transpose() + dn.decomp.a_u);
        gc.beta.push_back(2.0 * nr * nr + nu);
    }
    gc.beta_bar = *std::max_element(gc.beta.begin(), gc.beta.end());
    gc.beta_sum = 0.0;
    for (double b : gc.beta) gc.beta_sum += b;

    const double n_nodes = static_cast<double>(graph.n_nodes);
    const double slack = gamma_coupling - gc.beta_bar / (2.0 * gc.lambda2);
    const double rhs = gc.beta_bar * gc.beta_bar * n_nodes * n_nodes /
                       (2.0 * gc.lambda2 * gc.theta);
    gc.satisfied = slack > 0.0;
    for (const auto& dn : designs) {
        if (dn.k_weight < 1.0) gc.satisfied = false;
        if (!((dn.k_weight - gc.beta_sum / gc.theta) * slack > rhs)) gc.satisfied = false;
    }
    return gc;
}

void observer_rhs(const ObserverBank& bank, const plant::LinearModel& model,
                  std::span<const double> xhat, std::span<const double> y,
                  std::span<const double> u, std::span<double> out) {
    const std::size_t n = model.a_mat.rows();
    if (n > 8) {
        throw std::invalid_argument("observer_rhs: state dimension exceeds 8");
    }
    const std::size_t n_nodes = bank.designs.size();
    const Matrix& a = model.a_mat;
    const Matrix& b = model.b_mat;

    std::size_t y_off = 0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto& dn = bank.designs[i];
        const std::size_t p = dn.h_row.rows();
        const double* xi = xhat.data() + i * n;
        double* oi = out.data() + i * n;

        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += a(r, c) * xi[c];
            for (std::size_t c = 0; c < u.size(); ++c) acc += b(r, c) * u[c];
            oi[r] = acc;
        }
        for (std::size_t l = 0; l < p; ++l) {
            double innov = y[y_off + l];
            for (std::size_t c = 0; c < n; ++c) innov -= dn.h_row(l, c) * xi[c];
            for (std::size_t r = 0; r < n; ++r) oi[r] += dn.l_full(r, l) * innov;
        }
        // consensus coupling gamma M_i^{-1} sum_j alpha_ij (xhat_j - xhat_i)
        double coup[8] = {0.0};
        for (std::size_t j = 0; j < n_nodes; ++j) {
            const double alpha = bank.graph.adjacency(i, j);
            if (alpha == 0.0) continue;
            const double* xj = xhat.data() + j * n;
            for (std::size_t c = 0; c < n; ++c) coup[c] += alpha * (xj[c] - xi[c]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += dn.m_full_inv(r, c) * coup[c];
            oi[r] += bank.gamma_coupling * acc;
        }
        y_off += p;
    }
}

smallmat::Matrix error_dynamics_matrix(const ObserverBank& bank,
                                       const plant::LinearModel& model) {
    const std::size_t n = model.a_mat.rows();
    const std::size_t n_nodes = bank.designs.size();
    const Matrix lap = laplacian(bank.graph);

    Matrix e(n * n_nodes, n * n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto& dn = bank.designs[i];
        e.set_block(i * n, i * n, model.a_mat - dn.l_full * dn.h_row);
        for (std::size_t j = 0; j < n_nodes; ++j) {
            if (lap(i, j) == 0.0) continue;
            const Matrix coupling = (-bank.gamma_coupling * lap(i, j)) * dn.m_full_inv;
            e.set_block(i * n, j * n, e.block(i * n, j * n, n, n) + coupling);
        }
    }
    return e;
}

} // namespace qtank::observer
