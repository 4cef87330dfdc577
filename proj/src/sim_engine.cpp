#include "qtank/sim_engine.hpp"

#include <cmath>
#include <sstream>

namespace qtank::sim {

using smallmat::Matrix;

SimConfig default_config(plant::Phase phase) {
    SimConfig cfg;
    cfg.geometry = plant::default_geometry();
    cfg.op = plant::operating_point(phase);
    if (phase == plant::Phase::Minus) {
        cfg.pi_gains = {control::PiGains{3.0, 30.0}, control::PiGains{2.7, 40.0}};
        cfg.t_end = 500.0;
    } else {
        cfg.pi_gains = {control::PiGains{1.5, 110.0}, control::PiGains{-0.12, 220.0}};
        cfg.t_end = 5000.0;
    }
    cfg.schedule.entries = {{0.0, 0.0, 0.0},
                            {100.0, 1.0, 0.0},
                            {200.0, 1.0, 1.0},
                            {300.0, 0.0, 1.0},
                            {350.0, 0.0, 0.0}};
    cfg.dt = 0.01;
    cfg.x0_deviation = {8.0, 5.0, -2.0, 1.0};
    return cfg;
}

BankBuild build_observer_bank(const plant::LinearModel& model, const ObserverConfig& cfg) {
    const std::size_t p = model.c_mat.rows();
    const std::size_t n_nodes = cfg.n_nodes;
    if (n_nodes == 0 || p % n_nodes != 0) {
        throw std::invalid_argument("build_observer_bank: output rows must split evenly "
                                    "across nodes");
    }
    if (cfg.k_weight.size() != n_nodes) {
        throw std::invalid_argument("build_observer_bank: need one k weight per node");
    }
    const std::size_t rows_per_node = p / n_nodes;

    BankBuild out;
    out.bank.graph = observer::make_graph(n_nodes, cfg.edges);
    out.bank.gamma_coupling = cfg.gamma_coupling;

    for (std::size_t i = 0; i < n_nodes; ++i) {
        observer::NodeObserverDesign dn;
        dn.h_row = model.c_mat.block(i * rows_per_node, 0, rows_per_node, model.c_mat.cols());
        dn.decomp = observer::decompose(model, dn.h_row);
        dn.k_weight = cfg.k_weight[i];

        std::optional<Matrix> given;
        if (i < cfg.l_given.size() && !cfg.l_given[i].empty()) {
            const auto& vals = cfg.l_given[i];
            const std::size_t r = dn.decomp.a_d.rows();
            if (rows_per_node != 1 || vals.size() != r) {
                throw std::invalid_argument(
                    "build_observer_bank: explicit L for node " + std::to_string(i + 1) +
                    " must list " + std::to_string(r) + " values for a single-output node");
            }
            Matrix l(r, 1);
            for (std::size_t k = 0; k < r; ++k) l(k, 0) = vals[k];
            given = l;
        }

        try {
            dn.l_d = observer::validate_or_design_lid(dn.decomp, given);
        } catch (const observer::NotHurwitz& e) {
            out.notes.push_back({i, std::string("L_") + std::to_string(i + 1) +
                                        "d REJECTED (not Hurwitz: " + e.what() +
                                        "), replaced by placement"});
            dn.l_d = observer::validate_or_design_lid(dn.decomp, std::nullopt);
        }
        dn.m_d = observer::solve_weighting(dn.decomp, dn.l_d);
        auto gains = observer::assemble_full_gains(dn.decomp, dn.l_d, dn.m_d, dn.k_weight);
        dn.l_full = std::move(gains.l_full);
        dn.m_full_inv = std::move(gains.m_full_inv);
        out.bank.designs.push_back(std::move(dn));
    }
    return out;
}

std::vector<double> rk4_step(const std::vector<double>& state, double t, double dt,
                             const std::function<void(const std::vector<double>&, double,
                                                      std::vector<double>&)>& rhs) {
    const std::size_t n = state.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), out(n);

    rhs(state, t, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    rhs(tmp, t + 0.5 * dt, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    rhs(tmp, t + 0.5 * dt, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    rhs(tmp, t + dt, k4);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

namespace {

// stacked state layout: h[4] | pi integral[2] | xhat[4] per node
struct LoopContext {
    const SimConfig* cfg = nullptr;
    const plant::LinearModel* model = nullptr;
    const observer::ObserverBank* bank = nullptr;
    std::array<double, 2> r{};
};

void loop_rhs(const LoopContext& ctx, const std::vector<double>& s, std::vector<double>& ds) {
    const SimConfig& cfg = *ctx.cfg;
    const std::size_t n_nodes = ctx.bank->designs.size();

    std::array<double, 2> y{};
    for (std::size_t j = 0; j < 2; ++j) {
        y[j] = cfg.geometry.sensor_gain * (s[j] - cfg.op.h0[j]);
    }
    std::array<double, 2> u{};
    for (std::size_t j = 0; j < 2; ++j) {
        const double e = ctx.r[j] - y[j];
        u[j] = control::pi_output(cfg.pi_gains[j], e, s[4 + j]);
        ds[4 + j] = control::pi_rhs(e);
    }

    if (cfg.nonlinear_plant) {
        plant::PlantState ps{{s[0], s[1], s[2], s[3]}};
        const std::array<double, 2> v{cfg.op.v0[0] + u[0], cfg.op.v0[1] + u[1]};
        const auto dh = plant::nonlinear_rhs(cfg.geometry, cfg.op, ps, v);
        for (std::size_t j = 0; j < 4; ++j) ds[j] = dh[j];
    } else {
        const Matrix& a = ctx.model->a_mat;
        const Matrix& b = ctx.model->b_mat;
        for (std::size_t row = 0; row < 4; ++row) {
            double acc = 0.0;
            for (std::size_t c = 0; c < 4; ++c) acc += a(row, c) * (s[c] - cfg.op.h0[c]);
            for (std::size_t c = 0; c < 2; ++c) acc += b(row, c) * u[c];
            ds[row] = acc;
        }
    }

    const std::array<double, 2> u_obs =
        cfg.observer_feedforward ? u : std::array<double, 2>{0.0, 0.0};
    observer::observer_rhs(*ctx.bank, *ctx.model,
                           std::span<const double>(s.data() + 6, 4 * n_nodes),
                           std::span<const double>(y.data(), 2),
                           std::span<const double>(u_obs.data(), 2),
                           std::span<double>(ds.data() + 6, 4 * n_nodes));
}

ClosedLoopState unpack_state(const std::vector<double>& s, std::size_t n_nodes) {
    ClosedLoopState st;
    for (std::size_t j = 0; j < 4; ++j) st.levels.h[j] = s[j];
    st.pi.integral = {s[4], s[5]};
    st.estimates.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        for (std::size_t j = 0; j < 4; ++j) st.estimates[i][j] = s[6 + 4 * i + j];
    }
    return st;
}

TraceRow make_row(const LoopContext& ctx, double t, const ClosedLoopState& st) {
    const SimConfig& cfg = *ctx.cfg;
    TraceRow row;
    row.t = t;
    row.h = st.levels.h;
    for (std::size_t j = 0; j < 2; ++j) {
        row.y[j] = cfg.geometry.sensor_gain * (st.levels.h[j] - cfg.op.h0[j]);
        row.r[j] = ctx.r[j];
        row.v[j] = cfg.op.v0[j] + control::pi_output(cfg.pi_gains[j], ctx.r[j] - row.y[j],
                                                     st.pi.integral[j]);
    }
    const std::size_t n_nodes = st.estimates.size();
    row.xhat = st.estimates;
    row.err_norm.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        double err2 = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = st.estimates[i][j] - (st.levels.h[j] - cfg.op.h0[j]);
            err2 += d * d;
        }
        row.err_norm[i] = std::sqrt(err2);
    }
    return row;
}

} // namespace

SimTrace run_scenario(const SimConfig& cfg) {
    if (cfg.dt <= 0.0 || cfg.t_end < cfg.dt) {
        throw std::invalid_argument("run_scenario: need dt > 0 and t_end >= dt");
    }
    const double steps_real = cfg.t_end / cfg.dt;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(n_steps)) > 1e-6 * steps_real) {
        throw std::invalid_argument("run_scenario: t_end must be an integer number of steps");
    }
    control::validate(cfg.schedule);
    for (const auto& g : cfg.pi_gains) {
        if (g.Ti == 0.0) throw std::invalid_argument("run_scenario: Ti must be nonzero");
    }

    const plant::LinearModel model = plant::linearize(cfg.geometry, cfg.op);
    BankBuild build = build_observer_bank(model, cfg.observer);

    const Matrix err_dyn = observer::error_dynamics_matrix(build.bank, model);
    if (err_dyn.rows() <= 8 &&
        !smallmat::is_hurwitz(smallmat::char_poly(err_dyn)) && !cfg.force_design) {
        throw DesignRejected("run_scenario: stacked error dynamics matrix is not Hurwitz");
    }

    const std::size_t n_nodes = build.bank.designs.size();
    const std::size_t dim = 6 + 4 * n_nodes;
    std::vector<double> state(dim, 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
        state[j] = cfg.op.h0[j] + cfg.x0_deviation[j];
        if (cfg.nonlinear_plant) state[j] = std::max(state[j], 0.0);
    }
    if (!cfg.estimate_init.empty()) {
        if (cfg.estimate_init.size() != n_nodes) {
            throw std::invalid_argument("run_scenario: estimate_init size mismatch");
        }
        for (std::size_t i = 0; i < n_nodes; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                state[6 + 4 * i + j] = cfg.estimate_init[i][j];
            }
        }
    }

    LoopContext ctx{&cfg, &model, &build.bank, {}};
    auto rhs = [&ctx](const std::vector<double>& s, double, std::vector<double>& ds) {
        loop_rhs(ctx, s, ds);
    };

    SimTrace trace;
    trace.n_nodes = n_nodes;
    trace.rows.reserve(n_steps + 1);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t step = 0; step <= n_steps; ++step) {
        const double t = static_cast<double>(step) * cfg.dt;
        ctx.r = control::schedule_lookup(cfg.schedule, t);
        trace.rows.push_back(make_row(ctx, t, unpack_state(state, n_nodes)));
        if (step == n_steps) break;

        // set-point frozen at the step's start time for all four stages
        rhs(state, t, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * cfg.dt * k1[i];
        rhs(tmp, t, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * cfg.dt * k2[i];
        rhs(tmp, t, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + cfg.dt * k3[i];
        rhs(tmp, t, k4);
        for (std::size_t i = 0; i < dim; ++i) {
            state[i] += cfg.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (cfg.nonlinear_plant) {
            for (std::size_t j = 0; j < 4; ++j) state[j] = std::max(state[j], 0.0);
        }
        for (double v : state) {
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "run_scenario: non-finite state at t = " << t + cfg.dt;
                throw NonFiniteState(os.str());
            }
        }
    }
    return trace;
}

Metrics compute_metrics(const SimTrace& trace, const control::SetpointSchedule& schedule,
                        double band) {
    if (band <= 0.0) {
        throw std::invalid_argument("compute_metrics: band must be > 0");
    }
    control::validate(schedule);
    Metrics m;
    const double t_last = schedule.entries.back().t_start;

    for (std::size_t out = 0; out < 2; ++out) {
        std::optional<double> settle;
        for (std::size_t i = trace.rows.size(); i-- > 0;) {
            const auto& row = trace.rows[i];
            if (std::abs(row.y[out] - row.r[out]) > band) break;
            if (row.t >= t_last) settle = row.t;
        }
        m.settling_time[out] = settle;
    }

    const std::size_t n_nodes = trace.n_nodes;
    m.final_estimation_error.assign(n_nodes, 0.0);
    m.peak_estimation_error_after_steps.assign(n_nodes, 0.0);
    if (!trace.rows.empty()) {
        for (std::size_t i = 0; i < n_nodes; ++i) {
            m.final_estimation_error[i] = trace.rows.back().err_norm[i];
        }
        if (schedule.entries.size() > 1) {
            const double t_first = schedule.entries[1].t_start;
            for (const auto& row : trace.rows) {
                if (row.t < t_first) continue;
                for (std::size_t i = 0; i < n_nodes; ++i) {
                    m.peak_estimation_error_after_steps[i] =
                        std::max(m.peak_estimation_error_after_steps[i], row.err_norm[i]);
                }
            }
        }
    }
    return m;
}

} // namespace qtank::sim
