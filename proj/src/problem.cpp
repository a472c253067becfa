#include "socp/problem.hpp"

#include <Eigen/SVD>

#include <fstream>
#include <random>
#include <sstream>

namespace socp {

ControlledSode sode_from_lagrangian(const ForceControlledLagrangian& sys, int dim_q, int dim_u) {
    ControlledSode out;
    out.dim_q = dim_q;
    out.dim_u = dim_u;
    StateScalarFn L = sys.lagrangian;
    ForceFn force = sys.force;
    out.accel = [L, force, dim_q](const JetVec& q, const JetVec& v, const JetVec& u) -> JetVec {
        const int d = dim_q;
        DDJVec Q = seed_ddual(q, 2 * d, 0);
        DDJVec V = seed_ddual(v, 2 * d, d);
        DDJ Lval = L.dual2(Q, V);
        JetVec fl = force(q, v, u);
        // rhs_i = D1L_i + fL_i - sum_j d2L/dv_i dq_j * v_j
        std::vector<JetVec> hvv(d, JetVec(d));
        JetVec rhs(d);
        for (int i = 0; i < d; ++i) {
            Jet r = Lval.g[i].v + fl[i];
            for (int j = 0; j < d; ++j) {
                r = r - Lval.g[d + i].g[j] * v[j];
                hvv[i][j] = Lval.g[d + i].g[d + j];
            }
            rhs[i] = r;
        }
        // Condition estimate on the value part before the jet solve.
        Mat hvv_val(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) hvv_val(i, j) = hvv[i][j].v;
        Eigen::JacobiSVD<Mat> svd(hvv_val);
        double smin = svd.singularValues()(d - 1);
        double smax = svd.singularValues()(0);
        if (smin <= 1e-12 * std::max(1.0, smax))
            throw EvalError("sode_from_lagrangian: singular mass matrix, cond ~ " +
                            std::to_string(smax / std::max(smin, 1e-300)));
        return solve_linear(hvv, rhs);
    };
    return out;
}

std::vector<Vec> sample_box_points(const SampleBox& box, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int dq = static_cast<int>(box.q_lo.size());
    const int du = static_cast<int>(box.u_lo.size());
    std::vector<Vec> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        Vec p(2 * dq + du);
        for (int i = 0; i < dq; ++i) p[i] = box.q_lo[i] + unif(rng) * (box.q_hi[i] - box.q_lo[i]);
        for (int i = 0; i < dq; ++i)
            p[dq + i] = box.v_lo[i] + unif(rng) * (box.v_hi[i] - box.v_lo[i]);
        for (int i = 0; i < du; ++i)
            p[2 * dq + i] = box.u_lo[i] + unif(rng) * (box.u_hi[i] - box.u_lo[i]);
        pts.push_back(std::move(p));
    }
    return pts;
}

Actuation actuation_classify(const OcpProblem& p, const std::vector<Vec>& samples) {
    const int d = p.dim_q();
    const int nu = p.dim_u();
    if (nu > d) throw std::invalid_argument("actuation_classify: dim_u > dim_q unsupported");
    for (const Vec& s : samples) {
        Vec q = s.segment(0, d), v = s.segment(d, d), u = s.segment(2 * d, nu);
        // Jacobian of X_v w.r.t. u only.
        JetVec qj = to_jets(q), vj = to_jets(v);
        JetVec uj = seed_block(u, nu, 0, 1);
        JetVec xv = p.sode.accel(qj, vj, uj);
        Mat J = Mat::Zero(d, nu);
        for (int i = 0; i < d; ++i)
            if (!xv[i].constant()) J.row(i) = xv[i].g.transpose();
        Eigen::JacobiSVD<Mat> svd(J);
        const auto& sv = svd.singularValues();
        double smax = sv.size() ? sv(0) : 0.0;
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > 1e-10 * std::max(smax, 1.0)) ++rank;
        if (rank < d) return Actuation::Under;
    }
    return Actuation::Full;
}

Actuation actuation_classify(const OcpProblem& p, int n_samples, std::uint64_t seed) {
    return actuation_classify(p, sample_box_points(p.box, n_samples, seed));
}

Diagnostics validate_problem(const OcpProblem& p, std::uint64_t seed) {
    Diagnostics diag;
    const int d = p.dim_q();
    const int nu = p.dim_u();
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        diag.checks.push_back({name, pass, detail});
    };

    // Dimension consistency at the initial point.
    try {
        Vec u0 = Vec::Zero(nu);
        JetVec xv = p.sode.accel(to_jets(p.boundary.q0), to_jets(p.boundary.v0), to_jets(u0));
        bool ok = static_cast<int>(xv.size()) == d && static_cast<int>(p.boundary.q0.size()) == d &&
                  static_cast<int>(p.boundary.v0.size()) == d;
        add("dimensions", ok,
            ok ? "" : "accel output length " + std::to_string(xv.size()) + ", expected " + std::to_string(d));
    } catch (const std::exception& e) {
        add("dimensions", false, e.what());
    }

    if (p.boundary.mode == TerminalMode::Fixed) {
        bool ok = static_cast<int>(p.boundary.qT.size()) == d &&
                  static_cast<int>(p.boundary.vT.size()) == d;
        add("terminal dimensions", ok, ok ? "" : "qT/vT length mismatch");
    }

    auto samples = sample_box_points(p.box, 100, seed);

    if (p.lagrangian) {
        ControlledSode derived = sode_from_lagrangian(*p.lagrangian, d, nu);
        double worst = 0.0;
        std::string err;
        for (const Vec& s : samples) {
            try {
                JetVec q = to_jets(s.segment(0, d));
                JetVec v = to_jets(s.segment(d, d));
                JetVec u = to_jets(s.segment(2 * d, nu));
                JetVec a = p.sode.accel(q, v, u);
                JetVec b = derived.accel(q, v, u);
                for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(a[i].v - b[i].v));
            } catch (const std::exception& e) {
                err = e.what();
                break;
            }
        }
        bool ok = err.empty() && worst <= 1e-10;
        add("lagrangian/sode agreement", ok,
            err.empty() ? "max residual " + std::to_string(worst) : err);
    }

    // Smoothness spot checks at a few sample points.
    {
        double worst1 = 0.0, worst2 = 0.0;
        std::string err;
        auto flat = [&](const JetVec& x) -> JetVec {
            JetVec q(x.begin(), x.begin() + d);
            JetVec v(x.begin() + d, x.begin() + 2 * d);
            JetVec u(x.begin() + 2 * d, x.end());
            JetVec out = p.sode.accel(q, v, u);
            out.push_back(p.cost.value(q, v, u));
            return out;
        };
        for (int k = 0; k < 5 && k < static_cast<int>(samples.size()); ++k) {
            try {
                worst1 = std::max(worst1, fd_check(flat, samples[k], 1e-5, 1));
                worst2 = std::max(worst2, fd_check(flat, samples[k], 1e-4, 2));
            } catch (const std::exception& e) {
                err = e.what();
                break;
            }
        }
        bool ok = err.empty() && worst1 <= 1e-6 && worst2 <= 1e-4;
        add("derivative spot checks", ok,
            err.empty() ? "fd dev " + std::to_string(worst1) + " / " + std::to_string(worst2) : err);
    }

    return diag;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Vec parse_vec(const std::string& s, const std::string& key) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            size_t pos = 0;
            vals.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("invalid numeric value for key '" + key + "': " + tok);
        }
    }
    if (vals.empty()) throw ConfigError("empty value for key '" + key + "'");
    Vec v(static_cast<int>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
    return v;
}

double parse_double(const std::string& s, const std::string& key) {
    Vec v = parse_vec(s, key);
    if (v.size() != 1) throw ConfigError("key '" + key + "' expects a single value");
    return v[0];
}

}  // namespace

ProblemConfig parse_problem_config(const std::string& text) {
    ProblemConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key == "problem") {
            cfg.problem = val;
        } else if (key == "T") {
            cfg.T = parse_double(val, key);
        } else if (key == "N") {
            cfg.N = static_cast<int>(parse_double(val, key));
        } else if (key == "q0") {
            cfg.q0 = parse_vec(val, key);
        } else if (key == "v0") {
            cfg.v0 = parse_vec(val, key);
        } else if (key == "qT") {
            cfg.qT = parse_vec(val, key);
        } else if (key == "vT") {
            cfg.vT = parse_vec(val, key);
        } else if (key == "terminal_mode") {
            if (val == "fixed")
                cfg.terminal_mode = TerminalMode::Fixed;
            else if (val == "free")
                cfg.terminal_mode = TerminalMode::Free;
            else
                throw ConfigError("terminal_mode must be 'fixed' or 'free', got '" + val + "'");
        } else if (key.rfind("params.", 0) == 0) {
            cfg.params[key.substr(7)] = parse_double(val, key);
        } else if (key == "tol_newton") {
            cfg.tol_newton = parse_double(val, key);
        } else if (key == "tol_shoot") {
            cfg.tol_shoot = parse_double(val, key);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    return cfg;
}

ProblemConfig load_problem_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem_config(ss.str());
}

void apply_config(OcpProblem& p, const ProblemConfig& cfg) {
    auto check_dim = [&](const Vec& v, const char* key) {
        if (static_cast<int>(v.size()) != p.dim_q())
            throw ConfigError(std::string(key) + " has length " + std::to_string(v.size()) +
                              ", problem expects " + std::to_string(p.dim_q()));
    };
    if (cfg.T) {
        if (*cfg.T <= 0) throw ConfigError("T must be positive");
        p.boundary.T = *cfg.T;
    }
    if (cfg.q0) {
        check_dim(*cfg.q0, "q0");
        p.boundary.q0 = *cfg.q0;
    }
    if (cfg.v0) {
        check_dim(*cfg.v0, "v0");
        p.boundary.v0 = *cfg.v0;
    }
    if (cfg.qT) {
        check_dim(*cfg.qT, "qT");
        p.boundary.qT = *cfg.qT;
    }
    if (cfg.vT) {
        check_dim(*cfg.vT, "vT");
        p.boundary.vT = *cfg.vT;
    }
    if (cfg.terminal_mode) p.boundary.mode = *cfg.terminal_mode;
}

}  // namespace socp
