#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxent_tail/io.hpp"
#include "maxent_tail/maxent_tail.hpp"

namespace maxent_tail::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir;
    bool json = false;
    double tol = 1e-12;
};

struct ThetaArgs {
    std::optional<double> K;
    std::optional<double> eps;
    std::optional<double> nu_minus;
    std::string file;

    TailConstraints resolve() const {
        TailConstraints tc;
        if (!file.empty()) {
            std::ifstream in(file);
            if (!in) {
                throw UsageError("cannot read constraints file " + file);
            }
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw UsageError(std::string("constraints file is not valid JSON: ") + e.what());
            }
            tc = io::tail_constraints_from_json(j);
        } else if (!K || !eps || !nu_minus) {
            throw UsageError("tail constraints required: --K, --eps and --nu-minus (or --constraints FILE)");
        }
        if (K) {
            tc.K = *K;
        }
        if (eps) {
            tc.epsilon = *eps;
        }
        if (nu_minus) {
            tc.nu_minus = *nu_minus;
        }
        require_valid(tc);
        return tc;
    }
};

void add_theta(CLI::App* sub, ThetaArgs& t) {
    sub->add_option("--K", t.K, "VaR threshold K (< 0)");
    sub->add_option("--eps", t.eps, "tail probability epsilon in (0, 1/2)");
    sub->add_option("--nu-minus", t.nu_minus, "expected shortfall nu_- (< K)");
    sub->add_option("--constraints", t.file, "JSON file {\"K\":..,\"epsilon\":..,\"nu_minus\":..}");
}

struct GridArgs {
    std::vector<double> grid;

    void add(CLI::App* sub) {
        sub->add_option("--grid", grid, "x_min x_max points")->expected(3)->allow_extra_args(false);
    }

    struct Grid {
        double lo;
        double hi;
        std::size_t points;
    };

    Grid resolve(Grid fallback) const {
        if (grid.empty()) {
            return fallback;
        }
        const double pts = grid[2];
        if (!(grid[0] < grid[1]) || pts < 2 || pts != std::floor(pts)) {
            throw UsageError("--grid needs x_min < x_max and an integer point count >= 2");
        }
        return {grid[0], grid[1], static_cast<std::size_t>(pts)};
    }
};

class Runner {
public:
    Runner(const Globals& g, std::ostream& out) : g_(g), out_(out) {}

    void emit(const json& j, const std::string& human) {
        if (g_.json) {
            out_ << j.dump(2) << '\n';
        } else {
            out_ << human;
        }
    }

    bool writing() const { return !g_.out_dir.empty(); }

    void artifact(const std::string& name, const std::string& content) {
        if (!writing()) {
            return;
        }
        io::write_atomic(fs::path(g_.out_dir) / name, content);
        written_.push_back(name);
    }

    const Globals& globals() const { return g_; }
    const std::vector<std::string>& written() const { return written_; }

private:
    const Globals& g_;
    std::ostream& out_;
    std::vector<std::string> written_;
};

std::string kv(const std::string& key, double v) { return key + " = " + io::fmt(v) + "\n"; }

std::string fig_list() {
    return "Figure data sets (defaults; override with the listed flags):\n"
           "  prop1             Gaussian calibration: sweep of nu_- over (2K, K) for each eps.\n"
           "                    --K -1 --eps 0.01,0.05,0.1 --nu-minus <20 points in (2K,K)>\n"
           "  case-a-eps-sweep  Case A densities for several eps.\n"
           "                    --K -1 --nu-minus -1.5 --mu 0.05 --eps 0.01,0.05,0.1,0.2\n"
           "  case-a-nu-sweep   Case A densities for several nu_-.\n"
           "                    --K -1 --eps 0.05 --mu 0.05 --nu-minus -1.1,-1.5,-2,-3\n"
           "  case-c-sweep      Case C densities for several tail exponents.\n"
           "                    --K -1 --eps 0.05 --nu-minus -1.5 --alpha 0.5,1,1.5,2,3\n"
           "  multiperiod       Case A n-period averages by CF inversion, and KS-vs-n\n"
           "                    for Case A and Case C (alpha 1.5) by Monte Carlo.\n"
           "                    --K -1 --eps 0.05 --nu-minus -1.5 --mu 0.05 --n 1,5,30,100\n"
           "                    --alpha 1.5 --paths 20000\n"
           "  stoploss          Stopped and unstopped terminal distributions of a Gaussian walk.\n"
           "                    --drift 0 --vol 0.01 --steps 250 --stop -0.1 --paths 100000\n"
           "Grid for density sweeps: --grid -6 6 601. Output directory: -o (default figs_out).\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tail-constrained return distributions and their maximum-entropy extensions", "maxent-tail"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "random seed (default 42)");
    app.add_option("-o,--out", g.out_dir, "output directory for artifacts");
    app.add_flag("--json", g.json, "machine-readable stdout");
    app.add_option("--tol", g.tol, "quadrature tolerance for residual checks (default 1e-12)");

    Runner r(g, out);
    std::function<void()> action;

    // calibrate / nfl / compare -------------------------------------------------
    ThetaArgs th_cal;
    auto* cal = app.add_subcommand("calibrate", "Gaussian (mu, sigma) implied by the tail constraints");
    add_theta(cal, th_cal);
    cal->callback([&] {
        action = [&] {
            const auto tc = th_cal.resolve();
            const auto fit = calibrate_gaussian(tc);
            json j = io::to_json(fit);
            j["constraints"] = io::to_json(tc);
            r.artifact("calibration.json", j.dump(2) + "\n");
            r.emit(j, kv("mu", fit.mu) + kv("sigma", fit.sigma) + kv("B(eps)", fit.b_eps) + kv("eta(eps)", fit.eta_eps));
        };
    });

    ThetaArgs th_nfl;
    auto* nfl = app.add_subcommand("nfl", "positive-mean condition |nu_-| > K B(eps)");
    add_theta(nfl, th_nfl);
    nfl->callback([&] {
        action = [&] {
            const auto tc = th_nfl.resolve();
            const auto res = no_free_lunch(tc);
            const auto fit = calibrate_gaussian(tc);
            json j = {{"positive_mean", res.positive_mean}, {"margin", res.margin}, {"mu", fit.mu},
                      {"constraints", io::to_json(tc)}};
            r.artifact("nfl.json", j.dump(2) + "\n");
            r.emit(j, std::string("positive_mean = ") + (res.positive_mean ? "true" : "false") + "\n" +
                          kv("margin", res.margin) + kv("mu", fit.mu));
        };
    });

    ThetaArgs th_cmp;
    auto* cmp = app.add_subcommand("compare", "Gaussian calibration versus Case A at the same mean");
    add_theta(cmp, th_cmp);
    cmp->callback([&] {
        action = [&] {
            const auto c = compare_frameworks(th_cmp.resolve());
            const json j = io::to_json(c);
            r.artifact("compare.json", j.dump(2) + "\n");
            r.emit(j, kv("gaussian.mu", c.gaussian.mu) + kv("gaussian.sigma", c.gaussian.sigma) +
                          kv("gaussian.entropy", c.gaussian_entropy) + kv("case_a.entropy", c.case_a_entropy) +
                          kv("entropy_gap", c.entropy_gap));
        };
    });

    // student-t -----------------------------------------------------------------
    ThetaArgs th_t;
    double t_alpha = 0.0;
    double t_m = 0.0;
    auto* st = app.add_subcommand("student-t", "Student-T scale meeting P(X <= K) = eps");
    add_theta(st, th_t);
    st->add_option("--alpha", t_alpha, "tail exponent (degrees of freedom)")->required();
    st->add_option("--m", t_m, "location (> K)")->required();
    st->callback([&] {
        action = [&] {
            const auto tc = th_t.resolve();
            const double s = student_t_scale(t_alpha, tc, t_m);
            const double kappa = student_t_kappa(t_alpha, tc.epsilon);
            const double closed = std::abs(tc.K - t_m) * kappa;
            const StudentTDensity d{t_m, s, t_alpha};
            json j = {{"s", s},
                      {"kappa_magnitude", kappa},
                      {"closed_form_discrepancy", std::abs(s - closed)},
                      {"tail_probability", d.cdf(tc.K)},
                      {"constraints", io::to_json(tc)}};
            r.artifact("student_t.json", j.dump(2) + "\n");
            r.emit(j, kv("s", s) + kv("|kappa|", kappa) + kv("closed_form_discrepancy", std::abs(s - closed)));
        };
    });

    // mixture -------------------------------------------------------------------
    ThetaArgs th_mix;
    double mix_mu = 0.0;
    double mix_s1 = 1e-2;
    double mix_s2 = 1e-2;
    GridArgs mix_grid;
    auto* mix = app.add_subcommand("mixture", "two-normal mixture with the left spike at nu_-");
    add_theta(mix, th_mix);
    mix->add_option("--mu", mix_mu, "overall mean")->required();
    mix->add_option("--sigma1", mix_s1, "left component sd (default 0.01)");
    mix->add_option("--sigma2", mix_s2, "right component sd (default 0.01)");
    mix_grid.add(mix);
    mix->callback([&] {
        action = [&] {
            const auto tc = th_mix.resolve();
            const auto m = mixture_two_normals(tc, mix_mu, mix_s1, mix_s2);
            const auto res = feasibility_check(m, tc, r.globals().tol);
            json j = io::to_json(m);
            j["residuals"] = io::to_json(res);
            j["constraints"] = io::to_json(tc);
            const auto gr = mix_grid.resolve({-5.0, 5.0, 1001});
            r.artifact("mixture.json", j.dump(2) + "\n");
            r.artifact("density.csv", io::density_csv(m, gr.lo, gr.hi, gr.points));
            r.emit(j, kv("mu2", m.mu2) + kv("tail_prob_err", res.tail_prob_err) +
                          kv("shortfall_err", res.shortfall_err));
        };
    });

    // stoploss ------------------------------------------------------------------
    StopLossParams sl;
    auto* stop = app.add_subcommand("stoploss", "Gaussian walk absorbed at a stop level");
    stop->add_option("--drift", sl.drift, "mean increment per step (default 0)");
    stop->add_option("--vol", sl.vol, "increment sd per step (default 0.01)");
    stop->add_option("--K,--stop", sl.K, "stop level on the cumulative return (default -0.1)");
    stop->add_option("--steps", sl.steps, "steps per path (default 250)");
    stop->add_option("--paths", sl.paths, "number of paths (default 100000)");
    stop->add_option("--bins", sl.bins, "histogram bins (default 50)");
    stop->callback([&] {
        action = [&] {
            StopLossParams p = sl;
            p.seed = r.globals().seed;
            const auto rep = stoploss_simulate(p);
            const json j = io::to_json(rep);
            r.artifact("stoploss.csv", io::stoploss_csv(rep));
            r.artifact("stoploss.json", j.dump(2) + "\n");
            r.emit(j, kv("atom_mass", rep.atom_mass) + kv("terminal_mean", rep.terminal_mean) +
                          kv("terminal_skewness", rep.terminal_skewness));
        };
    });

    // maxent --------------------------------------------------------------------
    ThetaArgs th_me;
    std::string me_case;
    std::optional<double> me_mu;
    std::optional<double> me_mu_abs;
    std::optional<double> me_alpha;
    std::optional<double> me_A;
    GridArgs me_grid;
    auto* me = app.add_subcommand("maxent", "maximum-entropy extension: a (mean), b (absolute mean), c (power law)");
    me->add_option("case", me_case, "a | b | c")->required()->check(CLI::IsMember({"a", "b", "c"}));
    add_theta(me, th_me);
    me->add_option("--mu", me_mu, "Case A global mean");
    me->add_option("--mu-abs", me_mu_abs, "Case B absolute mean");
    me->add_option("--alpha", me_alpha, "Case C tail exponent");
    me->add_option("--A", me_A, "Case C log-moment constraint value");
    me_grid.add(me);
    me->callback([&] {
        action = [&] {
            const auto tc = th_me.resolve();
            MaxentModel m;
            if (me_case == "a") {
                if (!me_mu) {
                    throw UsageError("maxent a requires --mu");
                }
                m = build_case_a(tc, *me_mu);
            } else if (me_case == "b") {
                if (!me_mu_abs) {
                    throw UsageError("maxent b requires --mu-abs");
                }
                m = build_case_b(tc, *me_mu_abs);
            } else {
                if (me_alpha.has_value() == me_A.has_value()) {
                    throw UsageError("maxent c requires exactly one of --alpha or --A");
                }
                m = me_alpha ? build_case_c(tc, *me_alpha) : build_case_c_from_A(tc, *me_A);
            }
            const double tol = r.globals().tol;
            const auto res = feasibility_check(m.density, tc, tol);
            json j = io::to_json(m);
            j["entropy"] = m.density.entropy();
            j["residuals"] = io::to_json(res);
            j["global_residual"] = global_residual(m, tol);
            j["prob_positive"] = 1.0 - m.density.cdf(0.0);
            const auto gr = me_grid.resolve({tc.K - 10.0 * (tc.K - tc.nu_minus), 10.0, 1001});
            r.artifact("density.csv", io::density_csv(m.density, gr.lo, gr.hi, gr.points));
            r.artifact("model.json", io::to_json(m).dump(2) + "\n");
            std::string human = std::string("case ") + to_string(m.which) + "\n";
            if (m.derived.nu_plus) human += kv("nu_plus", *m.derived.nu_plus);
            if (m.derived.lambda1) human += kv("lambda1", *m.derived.lambda1);
            if (m.derived.alpha) human += kv("alpha", *m.derived.alpha);
            if (m.derived.A) human += kv("A", *m.derived.A);
            if (m.derived.C_alpha) human += kv("C_alpha", *m.derived.C_alpha);
            human += kv("entropy", m.density.entropy()) + kv("P(X>0)", 1.0 - m.density.cdf(0.0)) +
                     kv("tail_prob_err", res.tail_prob_err) + kv("shortfall_err", res.shortfall_err);
            r.emit(j, human);
        };
    });

    // solve-alpha ---------------------------------------------------------------
    double sa_A = 0.0;
    double sa_K = -1.0;
    auto* sa = app.add_subcommand("solve-alpha", "tail exponent alpha for a log-moment value A");
    sa->add_option("--A", sa_A, "log-moment constraint value")->required();
    sa->add_option("--K", sa_K, "threshold K (< 0)")->required();
    sa->callback([&] {
        action = [&] {
            const double alpha = solve_alpha_from_A(sa_A, sa_K);
            const json j = {{"A", sa_A}, {"K", sa_K}, {"alpha", alpha}, {"C_alpha", power_normalizer(alpha, sa_K)}};
            r.artifact("solve_alpha.json", j.dump(2) + "\n");
            r.emit(j, kv("alpha", alpha));
        };
    });

    // cf ------------------------------------------------------------------------
    ThetaArgs th_cf;
    double cf_mu = 0.0;
    std::size_t cf_n = 1;
    bool cf_avg = false;
    std::vector<double> cf_t{0.0, 0.5, 1.0, 2.0, 5.0};
    auto* cfc = app.add_subcommand("cf", "Case A characteristic function (sums or averages of n periods)");
    add_theta(cfc, th_cf);
    cfc->add_option("--mu", cf_mu, "global mean")->required();
    cfc->add_option("--n", cf_n, "number of periods (default 1)");
    cfc->add_flag("--average", cf_avg, "average instead of sum of periods");
    cfc->add_option("--t", cf_t, "frequencies, comma separated")->delimiter(',');
    cfc->callback([&] {
        action = [&] {
            if (cf_n < 1) {
                throw UsageError("--n must be >= 1");
            }
            const auto cf = characteristic_fn(build_case_a(th_cf.resolve(), cf_mu));
            io::CsvWriter w({"t", "re", "im", "abs"});
            json rows = json::array();
            std::string human;
            for (double t : cf_t) {
                const Complex v = cf_avg ? cf_average(cf, cf_n, t) : cf_npower(cf, cf_n, t);
                w.row({t, v.real(), v.imag(), std::abs(v)});
                rows.push_back({{"t", t}, {"re", v.real()}, {"im", v.imag()}});
                human += "t=" + io::fmt(t) + "  " + io::fmt(v.real()) + " + " + io::fmt(v.imag()) + "i\n";
            }
            r.artifact("cf.csv", w.str());
            r.emit({{"n", cf_n}, {"average", cf_avg}, {"mean", cf.mean()}, {"values", rows}}, human);
        };
    });

    // invert --------------------------------------------------------------------
    ThetaArgs th_inv;
    double inv_mu = 0.0;
    std::size_t inv_n = 1;
    std::size_t inv_points = 4096;
    InversionOptions inv_opt;
    auto* inv = app.add_subcommand("invert", "density of the n-period Case A sum by Fourier inversion");
    add_theta(inv, th_inv);
    inv->add_option("--mu", inv_mu, "global mean")->required();
    inv->add_option("--n", inv_n, "number of periods (default 1)");
    inv->add_option("--points", inv_points, "grid points over mean +- 10 sd (default 4096)");
    inv->add_option("--t-max", inv_opt.t_max, "frequency cap (default 2000)");
    inv->add_option("--cf-floor", inv_opt.cf_floor, "truncate where |Psi| falls below (default 1e-12)");
    inv->callback([&] {
        action = [&] {
            if (inv_n < 1 || inv_points < 2) {
                throw UsageError("--n must be >= 1 and --points >= 2");
            }
            const auto cf = characteristic_fn(build_case_a(th_inv.resolve(), inv_mu));
            const auto grid = default_sum_grid(cf, inv_n, inv_points);
            InversionOptions opt = inv_opt;
            opt.workers = 1;
            const auto res = invert_cf(npower(cf, inv_n), grid, opt);
            r.artifact("inversion.csv", io::inversion_csv(res));
            const json j = {{"n", inv_n},
                            {"points", inv_points},
                            {"normalization_defect", res.normalization_defect},
                            {"clipped", res.clipped},
                            {"t_cutoff", res.t_cutoff}};
            r.emit(j, kv("normalization_defect", res.normalization_defect) + kv("t_cutoff", res.t_cutoff));
        };
    });

    // aggregate -----------------------------------------------------------------
    ThetaArgs th_agg;
    std::string agg_case = "a";
    std::optional<double> agg_mu;
    std::optional<double> agg_alpha;
    std::size_t agg_n = 30;
    std::size_t agg_paths = 100000;
    auto* agg = app.add_subcommand("aggregate", "Monte Carlo n-period sums for Case A or Case C");
    agg->add_option("case", agg_case, "a | c")->check(CLI::IsMember({"a", "c"}));
    add_theta(agg, th_agg);
    agg->add_option("--mu", agg_mu, "Case A global mean");
    agg->add_option("--alpha", agg_alpha, "Case C tail exponent");
    agg->add_option("--n", agg_n, "periods per path (default 30)");
    agg->add_option("--paths", agg_paths, "paths (default 100000)");
    agg->callback([&] {
        action = [&] {
            const auto tc = th_agg.resolve();
            MaxentModel m;
            if (agg_case == "a") {
                if (!agg_mu) {
                    throw UsageError("aggregate a requires --mu");
                }
                m = build_case_a(tc, *agg_mu);
            } else {
                if (!agg_alpha) {
                    throw UsageError("aggregate c requires --alpha");
                }
                m = build_case_c(tc, *agg_alpha);
            }
            if (agg_n < 1 || agg_paths < 1) {
                throw UsageError("--n and --paths must be >= 1");
            }
            const auto rep = aggregate_mc(m, agg_n, agg_paths, r.globals().seed);
            r.artifact("aggregate.csv", io::aggregate_csv(rep));
            r.emit(io::to_json(rep), kv("sum_mean", rep.sums.mean) + kv("sum_variance", rep.sums.variance) +
                                         kv("sum_skewness", rep.sums.skewness) +
                                         kv("ks_sum_vs_normal", rep.ks_sum_normal));
        };
    });

    // portfolio -----------------------------------------------------------------
    std::string pf_file;
    auto* pf = app.add_subcommand("portfolio", "mean and variance of a weighted portfolio");
    pf->add_option("--spec", pf_file, "JSON {\"weights\":[..],\"mean_vector\":[..],\"covariance\":[[..]]}")->required();
    pf->callback([&] {
        action = [&] {
            std::ifstream in(pf_file);
            if (!in) {
                throw UsageError("cannot read portfolio file " + pf_file);
            }
            json spec;
            try {
                in >> spec;
            } catch (const json::exception& e) {
                throw UsageError(std::string("portfolio file is not valid JSON: ") + e.what());
            }
            const auto mom = portfolio_moments(io::portfolio_from_json(spec));
            const json j = {{"mean", mom.mean}, {"variance", mom.variance}};
            r.artifact("portfolio.json", j.dump(2) + "\n");
            r.emit(j, kv("mean", mom.mean) + kv("variance", mom.variance));
        };
    });

    // barbell -------------------------------------------------------------------
    double bb_w = 0.0;
    double bb_eps = 0.05;
    std::optional<double> bb_nu;
    std::optional<double> bb_mu;
    BarbellOptions bb_opt;
    GridArgs bb_grid;
    auto* bb = app.add_subcommand("barbell", "loss floor and tail constraints of a numeraire/risky barbell");
    bb->add_option("--w-safe", bb_w, "fraction held in the numeraire, in (0,1)")->required();
    bb->add_option("--eps", bb_eps, "tail probability (default 0.05)");
    bb->add_option("--nu-minus", bb_nu, "shortfall in portfolio units (default: at the floor)");
    bb->add_flag("--allow-beyond-floor", bb_opt.allow_beyond_floor, "accept a shortfall below the floor");
    bb->add_option("--mu", bb_mu, "overall mean; emits the hard-floor maximum-entropy density");
    bb_grid.add(bb);
    bb->callback([&] {
        action = [&] {
            const auto b = barbell_constraints(bb_w, bb_eps, bb_nu, bb_opt);
            json j = io::to_json(b);
            if (bb_mu) {
                const auto d = barbell_density(b, *bb_mu);
                j["density"] = io::to_json(d);
                const auto gr = bb_grid.resolve({b.K - 0.5, 3.0, 701});
                r.artifact("density.csv", io::density_csv(d, gr.lo, gr.hi, gr.points));
            }
            r.artifact("barbell.json", j.dump(2) + "\n");
            std::string human = kv("K", b.K) + kv("loss_bound", b.loss_bound);
            if (b.hard_floor_certificate) {
                human += "certificate: P(X < " + io::fmt(b.K) + ") = 0 for every return model\n";
            }
            if (b.degenerate_safe) {
                human += "degenerate: portfolio is (almost) entirely in the numeraire\n";
            }
            r.emit(j, human);
        };
    });

    // figs ----------------------------------------------------------------------
    std::string fig_name;
    bool fig_list_flag = false;
    std::vector<double> fig_eps;
    std::vector<double> fig_nu;
    std::vector<double> fig_alpha;
    std::vector<double> fig_n;
    double fig_K = -1.0;
    double fig_mu = 0.05;
    std::size_t fig_paths = 0;
    double fig_drift = 0.0;
    double fig_vol = 0.01;
    std::size_t fig_steps = 250;
    double fig_stop = -0.1;
    GridArgs fig_grid;
    auto* figs = app.add_subcommand("figs", "CSV data sets for plotting");
    figs->add_option("name", fig_name, "prop1 | case-a-eps-sweep | case-a-nu-sweep | case-c-sweep | multiperiod | stoploss")
        ->check(CLI::IsMember({"prop1", "case-a-eps-sweep", "case-a-nu-sweep", "case-c-sweep", "multiperiod", "stoploss"}));
    figs->add_flag("--list", fig_list_flag, "list figure data sets and their defaults");
    figs->add_option("--eps", fig_eps, "epsilon values")->delimiter(',');
    figs->add_option("--nu-minus", fig_nu, "nu_- values")->delimiter(',');
    figs->add_option("--alpha", fig_alpha, "alpha values")->delimiter(',');
    figs->add_option("--n", fig_n, "period counts")->delimiter(',');
    figs->add_option("--K", fig_K, "threshold K (default -1)");
    figs->add_option("--mu", fig_mu, "global mean (default 0.05)");
    figs->add_option("--paths", fig_paths, "Monte Carlo paths");
    figs->add_option("--drift", fig_drift, "stoploss drift per step (default 0)");
    figs->add_option("--vol", fig_vol, "stoploss sd per step (default 0.01)");
    figs->add_option("--steps", fig_steps, "stoploss steps (default 250)");
    figs->add_option("--stop", fig_stop, "stoploss level (default -0.1)");
    fig_grid.add(figs);
    figs->callback([&] {
        action = [&] {
            if (fig_list_flag) {
                out << fig_list();
                return;
            }
            if (fig_name.empty()) {
                throw UsageError("figs needs a name (see figs --list)");
            }
            Globals& gm = g;
            if (gm.out_dir.empty()) {
                gm.out_dir = "figs_out";
            }
            const double K = fig_K;
            const auto gr = fig_grid.resolve({-6.0, 6.0, 601});
            auto pick = [](const std::vector<double>& v, std::vector<double> def) { return v.empty() ? def : v; };
            json summary = {{"figure", fig_name}};

            if (fig_name == "prop1") {
                const auto eps_list = pick(fig_eps, {0.01, 0.05, 0.1});
                std::vector<double> nus = fig_nu;
                if (nus.empty()) {
                    for (int i = 1; i <= 20; ++i) {
                        nus.push_back(2.0 * K - K * i / 20.0 + (i == 20 ? K * 1e-3 : 0.0));
                    }
                }
                io::CsvWriter w({"epsilon", "nu_minus", "mu", "sigma", "margin", "gaussian_entropy"});
                for (double e : eps_list) {
                    for (double nu : nus) {
                        const TailConstraints tc{K, e, nu};
                        const auto fit = calibrate_gaussian(tc);
                        w.row({e, nu, fit.mu, fit.sigma, no_free_lunch(tc).margin, gaussian_entropy(fit.sigma)});
                    }
                }
                r.artifact("prop1_sweep.csv", w.str());
                const auto fit = calibrate_gaussian({K, 0.05, K * 1.5});
                r.artifact("prop1_density.csv", io::density_csv(fit.density(), gr.lo, gr.hi, gr.points));
            } else if (fig_name == "case-a-eps-sweep" || fig_name == "case-a-nu-sweep" || fig_name == "case-c-sweep") {
                std::vector<double> sweep;
                std::string column;
                if (fig_name == "case-a-eps-sweep") {
                    sweep = pick(fig_eps, {0.01, 0.05, 0.1, 0.2});
                    column = "epsilon";
                } else if (fig_name == "case-a-nu-sweep") {
                    sweep = pick(fig_nu, {-1.1, -1.5, -2.0, -3.0});
                    column = "nu_minus";
                } else {
                    sweep = pick(fig_alpha, {0.5, 1.0, 1.5, 2.0, 3.0});
                    column = "alpha";
                }
                io::CsvWriter w({column, "x", "pdf", "cdf"});
                io::CsvWriter m({column, "entropy", "prob_positive", "tail_prob_err", "shortfall_err"});
                const double eps0 = fig_eps.size() == 1 ? fig_eps[0] : 0.05;
                const double nu0 = fig_nu.size() == 1 ? fig_nu[0] : 1.5 * K;
                for (double v : sweep) {
                    MaxentModel model;
                    if (fig_name == "case-a-eps-sweep") {
                        model = build_case_a({K, v, nu0}, fig_mu);
                    } else if (fig_name == "case-a-nu-sweep") {
                        model = build_case_a({K, eps0, v}, fig_mu);
                    } else {
                        model = build_case_c({K, eps0, nu0}, v);
                    }
                    for (const auto& row : tabulate(model.density, gr.lo, gr.hi, gr.points)) {
                        w.row({v, row.x, row.pdf, row.cdf});
                    }
                    const auto res = feasibility_check(model.density, model.tc, gm.tol);
                    m.row({v, model.density.entropy(), 1.0 - model.density.cdf(0.0), res.tail_prob_err,
                           res.shortfall_err});
                }
                std::string base = fig_name;
                for (char& c : base) {
                    if (c == '-') c = '_';
                }
                r.artifact(base + ".csv", w.str());
                r.artifact(base + "_summary.csv", m.str());
            } else if (fig_name == "multiperiod") {
                const double eps0 = fig_eps.size() == 1 ? fig_eps[0] : 0.05;
                const double nu0 = fig_nu.size() == 1 ? fig_nu[0] : 1.5 * K;
                const TailConstraints tc{K, eps0, nu0};
                const auto model_a = build_case_a(tc, fig_mu);
                const auto model_c = build_case_c(tc, fig_alpha.size() == 1 ? fig_alpha[0] : 1.5);
                const auto cf = characteristic_fn(model_a);
                const auto ns = pick(fig_n, {1.0, 5.0, 30.0, 100.0});
                io::CsvWriter dens({"n", "x", "pdf"});
                io::CsvWriter ks({"n", "ks_case_a", "ks_case_c", "excess_kurtosis_case_a", "excess_kurtosis_case_c"});
                const std::size_t paths = fig_paths ? fig_paths : 20000;
                for (double nd : ns) {
                    if (nd < 1 || nd != std::floor(nd)) {
                        throw UsageError("--n values must be positive integers");
                    }
                    const auto n = static_cast<std::size_t>(nd);
                    InversionOptions opt;
                    opt.workers = 1;
                    const auto grid = default_sum_grid(cf, n);
                    const auto inv = invert_cf(npower(cf, n), grid, opt);
                    // Average = sum / n, so its density is n f_sum(n y).
                    for (std::size_t i = 0; i < grid.size(); ++i) {
                        dens.row({nd, grid[i] / nd, nd * inv.pdf_values[i]});
                    }
                    const auto ra = aggregate_mc(model_a, n, paths, gm.seed, 1);
                    const auto rc = aggregate_mc(model_c, n, paths, gm.seed, 1);
                    ks.row({nd, ra.ks_sum_normal, rc.ks_sum_normal, ra.sums.excess_kurtosis, rc.sums.excess_kurtosis});
                }
                r.artifact("multiperiod_average_density.csv", dens.str());
                r.artifact("multiperiod_ks.csv", ks.str());
            } else {
                StopLossParams p;
                p.drift = fig_drift;
                p.vol = fig_vol;
                p.steps = fig_steps;
                p.K = fig_stop;
                p.paths = fig_paths ? fig_paths : 100000;
                p.seed = gm.seed;
                p.workers = 1;
                const auto stopped = stoploss_simulate(p);
                p.K = -1e9;
                const auto free = stoploss_simulate(p);
                r.artifact("stoploss.csv", io::stoploss_csv(stopped));
                r.artifact("stoploss_unstopped.csv", io::stoploss_csv(free));
                summary["stopped"] = io::to_json(stopped);
                summary["unstopped"] = io::to_json(free);
            }
            summary["artifacts"] = r.written();
            summary["out_dir"] = gm.out_dir;
            std::string human;
            for (const auto& a : r.written()) {
                human += (fs::path(gm.out_dir) / a).string() + "\n";
            }
            r.emit(summary, human);
        };
    });

    if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
        bool known = false;
        for (const auto* sub : app.get_subcommands({})) {
            known = known || sub->check_name(args.front());
        }
        if (!known) {
            err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
            return 2;
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (action) {
            action();
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const maxent_tail::Error& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace maxent_tail::cli
