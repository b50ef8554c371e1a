#include "permlim/cli.hpp"

#include "permlim/analysis.hpp"
#include "permlim/discrepancy.hpp"
#include "permlim/permuton_io.hpp"
#include "permlim/segment_integrals.hpp"
#include "permlim/symmetry.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace permlim {

namespace {

struct RunConfig {
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t samples = 1'000'000;
    double tol = 1e-9;
    bool tol_set = false;
    int resolution = 0;  // 0: per-command default
    int threads = 0;
    std::string out;
    std::string format = "text";
    std::string mode = "exact";

    bool csv() const { return format == "csv"; }
    Budget budget() const
    {
        Budget b;
        b.samples = samples;
        b.seed = seed;
        b.threads = threads;
        if (resolution > 0) b.resolution = resolution;
        return b;
    }
};

// Inline "2,1,3" or a path to a permutation file.
Perm perm_arg(const std::string& text)
{
    if (std::filesystem::is_regular_file(text)) return read_perm_file(text);
    return parse_perm(text);
}

std::string num(double v)
{
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

std::string pattern_text(const Perm& p) { return p.str(' '); }

void write_report(std::ostream& out, const DensityReport& rep, const RunConfig& cfg)
{
    if (cfg.csv()) {
        out << "pattern,value" << (rep.exact ? ",exact" : ",ci99") << '\n';
        for (std::size_t r = 0; r < rep.patterns.size(); ++r) {
            out << pattern_text(rep.patterns[r]) << ',' << num(rep.values[r]) << ',';
            if (rep.exact) out << to_string(rep.exact_values[r]);
            else out << num(rep.ci99[r]);
            out << '\n';
        }
        return;
    }
    for (std::size_t r = 0; r < rep.patterns.size(); ++r) {
        out << rep.patterns[r] << "  ";
        if (rep.exact) out << to_string(rep.exact_values[r]) << "  (" << num(rep.values[r]) << ")";
        else out << num(rep.values[r]) << " +- " << num(rep.ci99[r]);
        out << '\n';
    }
    out << "defect = ";
    if (rep.exact) out << to_string(rep.exact_defect) << " (" << num(rep.defect) << ")";
    else out << num(rep.defect);
    out << " at " << rep.patterns[rep.witness] << '\n';
}

void write_verdict(std::ostream& out, const SymmetryVerdict& v, const RunConfig& cfg)
{
    write_report(out, v.densities, cfg);
    if (!cfg.csv()) {
        out << "k = " << v.k << ", " << (v.exact ? "exact" : "monte-carlo") << " verdict: ";
        if (v.exact) out << (v.exact_defect == 0 ? "k-symmetric" : "not k-symmetric") << '\n';
        else out << "defect " << num(v.defect) << " with ci99 " << num(v.ci99) << " at the witness\n";
    }
}

void write_value(std::ostream& out, const char* name, const Value& v)
{
    out << name << " = " << num(v.value);
    if (v.exact) out << " (" << to_string(*v.exact) << ")";
    if (v.error_radius > 0) out << " +- " << num(v.error_radius);
    out << '\n';
}

EvalMode eval_mode(const RunConfig& cfg)
{
    if (cfg.mode == "exact") return EvalMode::exact;
    if (cfg.mode == "mc") return EvalMode::mc;
    throw std::invalid_argument("--mode must be exact or mc");
}

std::vector<int> parse_sizes(const std::string& text)
{
    std::vector<int> sizes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty()) throw std::invalid_argument("bad size \"" + item + "\"");
        sizes.push_back(v);
    }
    return sizes;
}

}  // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Pattern densities, permutons and quasirandomness diagnostics", "permlim"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "Random seed")->default_val(kDefaultSeed);
    app.add_option("--samples", cfg.samples, "Monte-Carlo sample count")->check(CLI::PositiveNumber);
    app.add_option_function<double>(
           "--tol", [&](double v) { cfg.tol = v, cfg.tol_set = true; }, "Tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--resolution", cfg.resolution, "Grid resolution")->check(CLI::Range(2, 1000000));
    app.add_option("--threads", cfg.threads, "Worker cap (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", cfg.out, "Write output to this file instead of standard output");
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "csv"}));
    app.add_option("--mode", cfg.mode, "Evaluation mode")->check(CLI::IsMember({"exact", "mc"}));

    std::ostringstream out;
    std::function<void()> action;

    std::string a1, a2, a3;
    int k = 0, n = 0;
    bool no_prune = false, bound = false;
    std::string method;

    auto* density = app.add_subcommand("density", "t(pi, tau) for a pattern pi and a permutation tau");
    density->add_option("pi", a1)->required();
    density->add_option("tau", a2, "inline list or file")->required();
    density->callback([&] {
        action = [&] {
            const Perm pi = perm_arg(a1), tau = perm_arg(a2);
            if (cfg.mode == "mc") {
                const Estimate e = density_sampled(pi, tau, cfg.samples, cfg.seed);
                if (cfg.csv()) out << "estimate,ci99\n" << num(e.estimate) << ',' << num(e.ci99) << '\n';
                else out << "t" << pi << " ~ " << num(e.estimate) << " +- " << num(e.ci99) << '\n';
            } else {
                const Rational t = density_exact(pi, tau);
                if (cfg.csv()) out << "exact,value\n" << to_string(t) << ',' << num(t.get_d()) << '\n';
                else out << "t" << pi << " = " << to_string(t) << " (" << num(t.get_d()) << ")\n";
            }
        };
    });

    auto* densities = app.add_subcommand("densities", "All k-pattern densities of tau and the P(k) defect");
    densities->add_option("k", k)->required();
    densities->add_option("tau", a1)->required();
    densities->callback([&] { action = [&] { write_report(out, all_densities(k, perm_arg(a1)), cfg); }; });

    auto* disc = app.add_subcommand("discrepancy", "Normalized discrepancy d(tau)");
    disc->add_option("tau", a1)->required();
    disc->add_flag("--prefix-bound", bound, "Report the prefix deviation s with d <= 4 s instead of the exact value");
    disc->callback([&] {
        action = [&] {
            const Perm tau = perm_arg(a1);
            const PrefixDeviation p = prefix_deviation(tau);
            if (bound) {
                if (cfg.csv()) out << "prefix,lower,upper\n" << num(p.prefix) << ',' << num(p.lower) << ',' << num(p.upper) << '\n';
                else out << "prefix deviation s = " << num(p.prefix) << "\n" << num(p.lower) << " <= d <= " << num(p.upper) << '\n';
                return;
            }
            const Rational d = discrepancy_exact(tau);
            if (cfg.csv()) out << "exact,value,prefix\n" << to_string(d) << ',' << num(d.get_d()) << ',' << num(p.prefix) << '\n';
            else out << "d = " << to_string(d) << " (" << num(d.get_d()) << "), prefix deviation s = " << num(p.prefix) << '\n';
        };
    });

    auto* pdens = app.add_subcommand("permuton-density", "t(pi, mu) for a permuton file");
    pdens->add_option("pi", a1)->required();
    pdens->add_option("permuton", a2)->required()->check(CLI::ExistingFile);
    pdens->callback([&] {
        action = [&] {
            const Perm pi = perm_arg(a1);
            const Permuton mu = load_permuton(a2);
            const auto* g = mu.grid();
            if (cfg.mode == "exact" && g && pi.size() <= 4) {
                const Rational t = density_exact_grid(pi, *g);
                if (cfg.csv()) out << "exact,value\n" << to_string(t) << ',' << num(t.get_d()) << '\n';
                else out << "t" << pi << " = " << to_string(t) << " (" << num(t.get_d()) << ")\n";
            } else if (cfg.mode == "exact" && pi == Perm::identity(3) && flatten_segments(mu)) {
                const double t = segment_t_id3(*flatten_segments(mu));
                if (cfg.csv()) out << "value\n" << num(t) << '\n';
                else out << "t" << pi << " = " << num(t) << '\n';
            } else {
                if (cfg.mode == "exact")
                    throw std::invalid_argument("no exact path for this pattern and permuton; use --mode mc");
                const Estimate e = density_mc(pi, mu, cfg.samples, cfg.seed, cfg.threads);
                if (cfg.csv()) out << "estimate,ci99\n" << num(e.estimate) << ',' << num(e.ci99) << '\n';
                else out << "t" << pi << " ~ " << num(e.estimate) << " +- " << num(e.ci99) << '\n';
            }
        };
    });

    std::uint64_t count = 0;
    auto* sample = app.add_subcommand("sample", "Draw random permutations sigma(k, mu)");
    sample->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    sample->add_option("k", k)->required()->check(CLI::PositiveNumber);
    sample->add_option("count", count)->required()->check(CLI::PositiveNumber);
    sample->callback([&] {
        action = [&] {
            const Permuton mu = load_permuton(a1);
            Rng rng(cfg.seed);
            for (std::uint64_t i = 0; i < count; ++i) out << sample_perm(mu, k, rng).str(',') << '\n';
        };
    });

    auto* sym = app.add_subcommand("symmetry", "k-symmetry defect of a permuton");
    sym->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    sym->add_option("k", k)->required();
    sym->callback([&] {
        action = [&] {
            SymmetryOptions opt;
            opt.samples = cfg.samples;
            opt.seed = cfg.seed;
            opt.threads = cfg.threads;
            const Permuton mu = load_permuton(a1);
            if (cfg.mode == "mc") {
                if (k < 1 || k > kMaxExactK) throw std::invalid_argument("k must be within 1..6");
                write_report(out, densities_mc(k, mu, cfg.samples, cfg.seed, cfg.threads), cfg);
                return;
            }
            write_verdict(out, symmetry_defect(mu, k, opt), cfg);
        };
    });

    auto* infl = app.add_subcommand("inflatable", "Is tau k-inflatable (mu_tau exactly k-symmetric)?");
    infl->add_option("tau", a1)->required();
    infl->add_option("k", k)->required();
    infl->callback([&] {
        action = [&] {
            const InflatableResult r = is_inflatable(perm_arg(a1), k);
            write_verdict(out, r.verdict, cfg);
            if (!cfg.csv()) out << (r.inflatable ? "inflatable" : "not inflatable") << '\n';
        };
    });

    auto* search = app.add_subcommand("search-inflatable", "All k-inflatable permutations of length n");
    search->add_option("n", n)->required();
    search->add_option("k", k)->required();
    search->add_flag("--no-prune", no_prune, "Test every permutation instead of one per symmetry orbit");
    search->callback([&] {
        action = [&] {
            const auto found = search_inflatable(n, k, !no_prune, cfg.threads);
            for (const auto& p : found) out << p.str(',') << '\n';
            for (const auto& l : reflection_links(found))
                out << "# " << l.from.str(',') << " --" << l.op << "--> " << l.to.str(',') << '\n';
            out << "count=" << found.size() << '\n';
        };
    });

    auto integral_budget = [&] {
        Budget b = cfg.budget();
        if (method == "exact") b.method = IntegralMethod::exact;
        else if (method == "quadrature") b.method = IntegralMethod::quadrature;
        else if (method == "mc") b.method = IntegralMethod::mc;
        return b;
    };

    auto* integrals = app.add_subcommand("integrals", "Integrals of the distribution function F against mu and lambda");
    integrals->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    integrals->add_option("--method", method)->check(CLI::IsMember({"exact", "quadrature", "mc"}));
    integrals->callback([&] {
        action = [&] {
            const IntegralReport r = lemma_integrals(load_permuton(a1), integral_budget());
            if (cfg.csv()) {
                out << "quantity,value,error_radius,method\n";
                const std::pair<const char*, const Value*> rows[] = {
                    {"f2_mu", &r.f2_mu}, {"fxy_mu", &r.fxy_mu}, {"f2_lambda", &r.f2_lambda}, {"fxy_lambda", &r.fxy_lambda}};
                for (const auto& [name, v] : rows)
                    out << name << ',' << num(v->value) << ',' << num(v->error_radius) << ',' << to_string(r.method) << '\n';
                return;
            }
            out << "method: " << to_string(r.method) << '\n';
            write_value(out, "int F(X,Y)^2 dmu     ", r.f2_mu);
            write_value(out, "int F(X,Y) X Y dmu   ", r.fxy_mu);
            write_value(out, "int F(x,y)^2 dlambda ", r.f2_lambda);
            write_value(out, "int F(x,y) x y dlambda", r.fxy_lambda);
        };
    });

    auto* chain = app.add_subcommand("chain", "The Cauchy-Schwarz chain with per-step slacks");
    chain->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    chain->add_option("--method", method)->check(CLI::IsMember({"exact", "quadrature", "mc"}));
    chain->callback([&] {
        action = [&] {
            const ChainReport r = cs_chain(load_permuton(a1), integral_budget());
            if (cfg.csv()) out << "step,relation,left,right,slack,error_radius,holds\n";
            for (std::size_t s = 0; s < r.steps.size(); ++s) {
                const auto& st = r.steps[s];
                if (cfg.csv()) {
                    out << s + 1 << ',' << st.relation << ',' << num(r.quantities[s].value) << ','
                        << num(r.quantities[s + 1].value) << ',' << num(st.slack) << ',' << num(st.error_radius) << ','
                        << (st.holds ? "yes" : "no") << '\n';
                } else {
                    out << "q" << s << " = " << num(r.quantities[s].value) << "  " << st.relation << "  q" << s + 1
                        << " = " << num(r.quantities[s + 1].value) << "   slack " << num(st.slack) << " +- "
                        << num(st.error_radius) << (st.holds ? "" : "   VIOLATED") << '\n';
                }
            }
        };
    });

    auto* ident = app.add_subcommand("identity", "Check int F xy dlambda = (1 - EX^2 - EY^2 + EX^2Y^2) / 4");
    ident->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    ident->add_option("--method", method)->check(CLI::IsMember({"exact", "quadrature", "mc"}));
    ident->callback([&] {
        action = [&] {
            const IdentityCheck c = identity_check(load_permuton(a1), integral_budget());
            if (cfg.csv()) {
                out << "lhs,rhs,slack,error_radius,pass\n"
                    << num(c.lhs.value) << ',' << num(c.rhs.value) << ',' << num(c.slack) << ',' << num(c.error_radius)
                    << ',' << (c.pass ? "yes" : "no") << '\n';
                return;
            }
            write_value(out, "lhs", c.lhs);
            write_value(out, "rhs", c.rhs);
            out << "slack = " << num(c.slack) << " (radius " << num(c.error_radius) << ") "
                << (c.pass ? "pass" : "FAIL") << '\n';
        };
    });

    auto root_action = [&](bool nu) {
        const double tol = cfg.tol_set ? cfg.tol : 1e-5;
        const RootResult r = nu ? find_nu(tol, eval_mode(cfg), cfg.budget()) : find_b(tol, eval_mode(cfg), cfg.budget());
        if (cfg.csv()) {
            out << "a,t\n";
            for (const auto& [a, t] : r.scan) out << num(a) << ',' << num(t) << '\n';
            out << num(r.root) << ',' << num(r.t.value) << '\n';
            return;
        }
        out << std::setprecision(15) << (nu ? "weight a = " : "b = ") << r.root << '\n'
            << "t(id3) = " << r.t.value << " (|t - 1/6| = " << std::abs(r.t.value - 1.0 / 6.0) << ", tol " << tol
            << ")\n";
    };
    auto* fb = app.add_subcommand("find-b", "Root b of t(id3, mu_b) = 1/6");
    fb->callback([&] { action = [&] { root_action(false); }; });
    auto* fn = app.add_subcommand("find-nu", "Mixture weight a with t(id3, nu_a) = 1/6");
    fn->callback([&] { action = [&] { root_action(true); }; });

    auto* conv = app.add_subcommand("converge", "Densities and discrepancy of sigma(n, mu) for a list of sizes");
    conv->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    conv->add_option("k", k)->required();
    conv->add_option("sizes", a2, "comma-separated increasing sizes")->required();
    conv->callback([&] {
        action = [&] {
            const auto rows = convergence_experiment(load_permuton(a1), k, parse_sizes(a2), cfg.seed);
            out << (cfg.csv() ? "n,pattern,density,disc_lower,disc_upper\n" : "");
            for (const auto& r : rows) {
                const char sep = cfg.csv() ? ',' : ' ';
                out << r.n << sep << pattern_text(r.pattern) << sep << num(r.density) << sep << num(r.disc_lower) << sep
                    << num(r.disc_upper) << '\n';
            }
        };
    });

    auto* marg = app.add_subcommand("check-marginals", "Strip-mass check of the marginals");
    marg->add_option("permuton", a1)->required()->check(CLI::ExistingFile);
    marg->callback([&] {
        action = [&] {
            const Permuton mu = load_permuton(a1);
            const MarginalReport r = marginal_check(mu, cfg.resolution > 0 ? cfg.resolution : 1000, cfg.tol);
            if (cfg.csv())
                out << "max_deviation,axis,strip,exact,pass\n"
                    << num(r.max_deviation) << ',' << r.axis << ',' << r.strip << ',' << r.exact << ','
                    << (r.pass ? "yes" : "no") << '\n';
            else
                out << "max deviation " << num(r.max_deviation) << " at " << r.axis << "-strip " << r.strip
                    << (r.exact ? " (exact)" : "") << ": " << (r.pass ? "pass" : "FAIL") << '\n';
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, std::cerr);
        return code == 0 ? 0 : 1;
    }

    try {
        action();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }

    if (cfg.out.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write " << cfg.out << '\n';
            return 1;
        }
        f << out.str();
    }
    return 0;
}

}  // namespace permlim
