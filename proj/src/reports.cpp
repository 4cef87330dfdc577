#include "qtank/reports.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qtank/freq_analysis.hpp"

namespace qtank::cli {

using smallmat::Matrix;

namespace {

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

std::string fmt_sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

// identify the coordinate permutation when the basis is one, e.g. "(x1 x3 | x2 x4)"
std::string describe_basis(const observer::NodeDecomposition& d) {
    const std::size_t n = d.basis.rows();
    std::ostringstream os;
    os << "(";
    for (std::size_t col = 0; col < n; ++col) {
        int match = -1;
        for (std::size_t row = 0; row < n; ++row) {
            const double v = std::abs(d.basis(row, col));
            if (std::abs(v - 1.0) < 1e-9) {
                match = static_cast<int>(row);
            } else if (v > 1e-9) {
                return "general (not a coordinate permutation)";
            }
        }
        if (match < 0) return "general (not a coordinate permutation)";
        if (col == n - d.sigma && d.sigma > 0) os << "| ";
        os << "x" << match + 1 << (col + 1 < n ? " " : "");
    }
    os << ")";
    return os.str();
}

} // namespace

double settling_band(const control::SetpointSchedule& schedule) {
    double mag = 0.0;
    for (std::size_t i = 1; i < schedule.entries.size(); ++i) {
        mag = std::max(mag, std::abs(schedule.entries[i].r1 - schedule.entries[i - 1].r1));
        mag = std::max(mag, std::abs(schedule.entries[i].r2 - schedule.entries[i - 1].r2));
    }
    return 0.02 * (mag > 0.0 ? mag : 1.0);
}

std::string analyze_report(const sim::SimConfig& cfg) {
    std::ostringstream os;
    const auto model = plant::linearize(cfg.geometry, cfg.op);
    const auto tm = freq::transfer_matrix(model, cfg.op, cfg.geometry);

    os << "phase: " << (cfg.op.phase_label == plant::Phase::Minus ? "minus" : "plus") << "\n";
    os << "time_constants:";
    for (double T : model.time_const) os << " " << fmt(T);
    os << " s\n";
    os << "transfer_gains: g11 = " << fmt(tm.num_gain[0][0], 3)
       << ", g12 = " << fmt(tm.num_gain[0][1], 3) << ", g21 = " << fmt(tm.num_gain[1][0], 3)
       << ", g22 = " << fmt(tm.num_gain[1][1], 3) << "\n";

    const auto za = freq::zero_analysis(tm, cfg.op);
    os << "eta = " << fmt(za.eta) << "\n";
    if (za.complex_pair) {
        os << "zeros: " << fmt(za.zeros[0].real()) << " +/- " << fmt(std::abs(za.zeros[0].imag()))
           << "i -> " << freq::to_string(za.classification) << " phase\n";
    } else {
        os << "zeros: " << fmt(za.zeros[0].real()) << ", " << fmt(za.zeros[1].real()) << " -> "
           << freq::to_string(za.classification) << " phase\n";
    }
    os << "valve_classification: " << freq::to_string(freq::classify_by_valve(cfg.op.valve_ratio))
       << " (gamma1 + gamma2 = " << fmt(cfg.op.valve_ratio[0] + cfg.op.valve_ratio[1], 2) << ")\n";

    if (!za.complex_pair && za.zeros[0].real() > 0.0) {
        const auto psi = freq::zero_direction(tm, za.zeros[0].real());
        os << "zero_direction: [" << fmt(psi[0]) << ", " << fmt(psi[1]) << "] at z = "
           << fmt(za.zeros[0].real()) << "\n";
    }

    const auto ig = freq::input_gain_nonsingular(cfg.op);
    try {
        const auto r = freq::rga(cfg.op);
        os << "lambda = " << fmt(r.lambda, 3) << "\n";
        os << "rga_matrix: [[" << fmt(r.rga_mat(0, 0), 3) << ", " << fmt(r.rga_mat(0, 1), 3)
           << "], [" << fmt(r.rga_mat(1, 0), 3) << ", " << fmt(r.rga_mat(1, 1), 3) << "]]\n";
    } catch (const freq::SingularDcGain&) {
        os << "lambda = undefined (DC gain singular: gamma1 + gamma2 = 1)\n";
    }
    os << "input_gain_det = " << fmt(ig.determinant) << " ("
       << (ig.nonsingular ? "nonsingular" : "singular") << ")\n";
    return os.str();
}

std::string design_observer_report(const sim::SimConfig& cfg) {
    std::ostringstream os;
    const auto model = plant::linearize(cfg.geometry, cfg.op);
    const auto build = sim::build_observer_bank(model, cfg.observer);

    for (std::size_t i = 0; i < build.bank.designs.size(); ++i) {
        const auto& dn = build.bank.designs[i];
        const std::string tag = "node " + std::to_string(i + 1) + ": ";
        os << tag << "sigma = " << dn.decomp.sigma << "\n";
        os << tag << "basis permutation = " << describe_basis(dn.decomp) << "\n";

        bool rejected = false;
        for (const auto& note : build.notes) {
            if (note.node == i) {
                os << tag << note.message << "\n";
                rejected = true;
            }
        }
        const Matrix f = dn.decomp.a_d - dn.l_d * dn.decomp.h_d;
        if (!rejected) {
            const bool was_given =
                i < cfg.observer.l_given.size() && !cfg.observer.l_given[i].empty();
            os << tag << "L_" << i + 1 << "d "
               << (was_given ? "accepted" : "designed by placement") << " (trace = "
               << fmt(f.trace()) << ")\n";
        }
        os << tag << "L_" << i + 1 << "d =";
        for (std::size_t r = 0; r < dn.l_d.rows(); ++r) {
            for (std::size_t c = 0; c < dn.l_d.cols(); ++c) os << " " << fmt(dn.l_d(r, c));
        }
        os << "\n";

        const Matrix resid =
            f.transpose() * dn.m_d + dn.m_d * f + Matrix::identity(f.rows());
        os << tag << "lyap_residual = " << fmt_sci(resid.max_norm()) << "\n";
        const auto eig = smallmat::sym_eigenvalues(dn.m_d);
        os << tag << "M_" << i + 1 << "d eigenvalues =";
        for (double e : eig) os << " " << fmt(e);
        os << "\n";
    }

    if (build.bank.graph.n_nodes >= 2) {
        const auto gc = observer::check_gain_condition(build.bank.designs, build.bank.graph,
                                                       cfg.observer.gamma_coupling,
                                                       cfg.observer.eps_bar);
        for (std::size_t i = 0; i < gc.beta.size(); ++i) {
            os << "node " << i + 1 << ": beta_" << i + 1 << " = " << fmt(gc.beta[i], 6) << "\n";
        }
        os << "lambda2 = " << fmt(gc.lambda2) << "\n";
        os << "beta_bar = " << fmt(gc.beta_bar, 6) << "\n";
        os << "beta_sum = " << fmt(gc.beta_sum, 6) << "\n";
        os << "theta = " << fmt(gc.theta) << "\n";
        os << "gain_condition: " << (gc.satisfied ? "satisfied" : "NOT satisfied") << "\n";
    } else {
        os << "gain_condition: single node, no consensus coupling to check\n";
    }

    const Matrix err_dyn = observer::error_dynamics_matrix(build.bank, model);
    const bool hurwitz = smallmat::is_hurwitz(smallmat::char_poly(err_dyn));
    os << "error_dynamics: " << (hurwitz ? "Hurwitz" : "NOT Hurwitz") << " ("
       << err_dyn.rows() << "x" << err_dyn.cols() << ")\n";
    return os.str();
}

std::string simulate_to_csv(const sim::SimConfig& cfg, const std::string& out_path) {
    const sim::SimTrace trace = sim::run_scenario(cfg);

    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + out_path);
    }
    out << "t,h1,h2,h3,h4,v1,v2,y1,y2,r1,r2";
    for (std::size_t i = 0; i < trace.n_nodes; ++i) {
        for (std::size_t j = 0; j < 4; ++j) out << ",xhat" << i + 1 << "_" << j + 1;
        out << ",errnorm" << i + 1;
    }
    out << "\n";
    out << std::setprecision(12);
    for (const auto& row : trace.rows) {
        out << row.t;
        for (double v : row.h) out << "," << v;
        for (double v : row.v) out << "," << v;
        for (double v : row.y) out << "," << v;
        for (double v : row.r) out << "," << v;
        for (std::size_t i = 0; i < trace.n_nodes; ++i) {
            for (double v : row.xhat[i]) out << "," << v;
            out << "," << row.err_norm[i];
        }
        out << "\n";
    }
    out.close();
    if (!out) {
        throw std::runtime_error("write failed: " + out_path);
    }

    const double band = settling_band(cfg.schedule);
    const auto metrics = sim::compute_metrics(trace, cfg.schedule, band);

    std::ostringstream os;
    os << "rows: " << trace.rows.size() << "\n";
    os << "columns: " << 11 + 5 * trace.n_nodes << "\n";
    os << "settling_band = " << fmt(band) << " V\n";
    for (std::size_t j = 0; j < 2; ++j) {
        os << "settling_time_y" << j + 1 << " = ";
        if (metrics.settling_time[j]) {
            os << fmt(*metrics.settling_time[j], 2) << " s\n";
        } else {
            os << "NotSettled\n";
        }
    }
    for (std::size_t i = 0; i < trace.n_nodes; ++i) {
        os << "final_estimation_error_node" << i + 1 << " = "
           << fmt_sci(metrics.final_estimation_error[i]) << " cm\n";
        os << "peak_estimation_error_node" << i + 1 << " = "
           << fmt_sci(metrics.peak_estimation_error_after_steps[i]) << " cm\n";
    }
    return os.str();
}

} // namespace qtank::cli
