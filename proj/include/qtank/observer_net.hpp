#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qtank/plant.hpp"
#include "qtank/smallmat.hpp"

namespace qtank::observer {

class DisconnectedGraph : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotDetectable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotHurwitz : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PlacementFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Undirected, unweighted communication graph over the sensor nodes.
struct SensorGraph {
    std::size_t n_nodes = 0;
    smallmat::Matrix adjacency; // symmetric 0/1, zero diagonal
};

SensorGraph make_graph(std::size_t n_nodes,
                       const std::vector<std::pair<std::size_t, std::size_t>>& edges);

smallmat::Matrix laplacian(const SensorGraph& g);

/// Second-smallest Laplacian eigenvalue (algebraic connectivity). Throws
/// DisconnectedGraph when it is not strictly positive.
double laplacian_lambda2(const SensorGraph& g);

/// Observability decomposition of (A, H_i) in an orthonormal basis: the first
/// n - sigma basis columns span the observable coordinates (Gram-Schmidt over
/// the observability-matrix rows in index order, then canonical completion),
/// so that H_i basis = [h_d 0] and basis^T A basis = [[a_d, 0], [a_r, a_u]].
struct NodeDecomposition {
    smallmat::Matrix basis; // n x n orthonormal
    smallmat::Matrix a_d;   // (n-sigma) x (n-sigma)
    smallmat::Matrix a_r;   // sigma x (n-sigma)
    smallmat::Matrix a_u;   // sigma x sigma, Hurwitz (detectability)
    smallmat::Matrix h_d;   // p_i x (n-sigma)
    std::size_t sigma = 0;
};

/// Throws NotDetectable when the unobservable block a_u is not Hurwitz.
NodeDecomposition decompose(const plant::LinearModel& model, const smallmat::Matrix& h_row);

/// Validates a supplied injection gain (a_d - l_d h_d must be Hurwitz, else
/// NotHurwitz carrying the trace/det counter-certificate), or designs one by
/// Ackermann pole placement at the given poles (default -1, -2, ...). For a
/// multi-row h_d the placement scalarizes through single rows first, then
/// the summed rows.
smallmat::Matrix validate_or_design_lid(const NodeDecomposition& d,
                                        const std::optional<smallmat::Matrix>& l_d_given,
                                        const std::vector<double>& poles = {});

/// Solves (a_d - l_d h_d)^T m + m (a_d - l_d h_d) = -I for the symmetric
/// positive definite weighting block.
smallmat::Matrix solve_weighting(const NodeDecomposition& d, const smallmat::Matrix& l_d);

struct FullGains {
    smallmat::Matrix l_full;     // n x p_i
    smallmat::Matrix m_full_inv; // n x n
};

/// Lifts the designed blocks back to plant coordinates:
/// l_full = basis [l_d; 0], m_full(k) = basis blockdiag(k m_d, I_sigma) basis^T.
FullGains assemble_full_gains(const NodeDecomposition& d, const smallmat::Matrix& l_d,
                              const smallmat::Matrix& m_d, double k_weight);

struct NodeObserverDesign {
    NodeDecomposition decomp;
    smallmat::Matrix h_row; // p_i x n output rows owned by this node
    smallmat::Matrix l_d;
    smallmat::Matrix m_d;
    double k_weight = 1.0;
    smallmat::Matrix l_full;
    smallmat::Matrix m_full_inv;
};

struct GainCondition {
    double gamma_coupling = 0.0;
    double eps_bar = 0.0;
    std::vector<double> beta;
    double beta_bar = 0.0;
    double beta_sum = 0.0;
    double lambda2 = 0.0;
    double theta = 0.0;
    bool satisfied = false;
};

/// Evaluates the sufficient coupling/weight condition
/// (k_i - beta/theta)(gamma - beta_bar/(2 lambda2)) > beta_bar^2 N^2 / (2 lambda2 theta)
/// together with k_i >= 1 and gamma > beta_bar/(2 lambda2), where
/// beta_i = 2 ||a_r||^2 + ||a_u^T + a_u|| (induced 2-norms).
GainCondition check_gain_condition(const std::vector<NodeObserverDesign>& designs,
                                   const SensorGraph& graph, double gamma_coupling,
                                   double eps_bar);

struct ObserverBank {
    std::vector<NodeObserverDesign> designs;
    SensorGraph graph;
    double gamma_coupling = 0.0;
};

/// Stacked estimate derivatives: for each node,
///   dxhat_i/dt = A xhat_i + B u + L_i (y_i - H_i xhat_i)
///              + gamma M_i(k_i)^{-1} sum_j alpha_ij (xhat_j - xhat_i).
/// xhat and out are stacked per node (n doubles each); y is stacked output
/// partitions in node order.
void observer_rhs(const ObserverBank& bank, const plant::LinearModel& model,
                  std::span<const double> xhat, std::span<const double> y,
                  std::span<const double> u, std::span<double> out);

/// Stacked estimation-error system matrix
/// blockdiag(A - L_i H_i) - gamma Mbar^{-1} (Laplacian (x) I_n).
smallmat::Matrix error_dynamics_matrix(const ObserverBank& bank,
                                       const plant::LinearModel& model);

} // namespace qtank::observer
