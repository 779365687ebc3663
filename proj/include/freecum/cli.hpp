#pragma once

// Command-line front end. run() is the whole program; tools/freecum.cpp only
// forwards argv and the standard streams.

#include "freecum/checker.hpp"
#include "freecum/distributions.hpp"
#include "freecum/engine.hpp"
#include "freecum/matrix_oracle.hpp"
#include "freecum/model.hpp"
#include "freecum/partition.hpp"
#include "freecum/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace freecum::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

enum class Format { json, csv, table };

struct RunConfig {
    std::string format = "table";
    int jobs = 1;
    bool timing = false;
    std::uint64_t seed = 0;

    Format output() const
    {
        if (format == "json")
            return Format::json;
        if (format == "csv")
            return Format::csv;
        return Format::table;
    }
};

namespace detail {

inline std::vector<Rational> parse_list(const std::vector<std::string>& tokens)
{
    std::vector<Rational> out;
    for (const auto& t : tokens)
        out.push_back(parse_rational(t));
    return out;
}

inline std::vector<Rational> or_default(const std::vector<std::string>& tokens, std::vector<Rational> fallback)
{
    return tokens.empty() ? fallback : parse_list(tokens);
}

inline int emit_reports(const std::vector<VerificationReport>& reports, const RunConfig& cfg, std::ostream& out)
{
    bool pass = true;
    for (const auto& r : reports)
        pass = pass && r.pass();
    switch (cfg.output()) {
    case Format::json: {
        nlohmann::json j;
        j["reports"] = nlohmann::json::array();
        for (const auto& r : reports)
            j["reports"].push_back(to_json(r, cfg.timing));
        j["pass"] = pass;
        out << j.dump(2) << "\n";
        break;
    }
    case Format::csv:
        for (std::size_t i = 0; i < reports.size(); ++i)
            out << to_csv(reports[i], i == 0);
        break;
    case Format::table:
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (i)
                out << "\n";
            out << to_table(reports[i], cfg.timing);
        }
        break;
    }
    return pass ? kExitPass : kExitFail;
}

inline void emit_sequence(const nlohmann::json& j, const std::string& key, const RunConfig& cfg, std::ostream& out)
{
    // Odd orders of the standardized free gamma law carry one factor of a.
    auto cell = [&](std::size_t i) {
        std::string v = j[key][i].get<std::string>();
        if (j.contains("odd_power") && j["odd_power"][i].get<bool>())
            v += "*a";
        return v;
    };
    switch (cfg.output()) {
    case Format::json:
        out << j.dump(2) << "\n";
        break;
    case Format::csv:
        out << "k," << key << "\n";
        for (std::size_t i = 0; i < j[key].size(); ++i)
            out << (j.value("offset", 1) + static_cast<int>(i)) << "," << cell(i) << "\n";
        break;
    case Format::table:
        out << "# " << j["law"].get<std::string>();
        for (const auto& name : {"lambda", "alpha", "a2"})
            if (j.contains(name))
                out << " " << name << "=" << j[name].get<std::string>();
        out << "\n";
        for (std::size_t i = 0; i < j[key].size(); ++i)
            out << key << "[" << (j.value("offset", 1) + static_cast<int>(i)) << "] = " << cell(i)
                << "\n";
        break;
    }
}

}  // namespace detail

/// Full CLI. Returns 0 on pass, 1 on a failed verification, 2 on usage or
/// domain errors.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exact free cumulants over non-crossing partitions"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    RunConfig cfg;
    if (const char* env = std::getenv("FREECUM_JOBS")) {
        try {
            cfg.jobs = std::max(1, std::stoi(env));
        } catch (...) {
        }
    }
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
    app.add_option("--jobs", cfg.jobs, "Worker threads (default: FREECUM_JOBS or 1)")->check(CLI::PositiveNumber);
    app.add_flag("--timing", cfg.timing, "Include elapsed times in reports");
    app.add_option("--seed", cfg.seed, "Seed for all randomness");

    int result = kExitPass;

    // nc
    auto* nc = app.add_subcommand("nc", "Non-crossing partition queries");
    nc->require_subcommand(1);
    int nc_n = 0;
    auto* nc_count = nc->add_subcommand("count", "Print |NC(n)|");
    nc_count->add_option("n", nc_n)->required();
    auto* nc_list = nc->add_subcommand("list", "List NC(n)");
    nc_list->add_option("n", nc_n)->required();
    std::string nc_part;
    auto* nc_krew = nc->add_subcommand("kreweras", "Kreweras complement of a partition like {1,2}{3,4}");
    nc_krew->add_option("partition", nc_part)->required();

    // dist
    auto* dist = app.add_subcommand("dist", "Cumulant and moment tables");
    dist->require_subcommand(1);
    std::string law = "free_poisson", d_lambda = "2", d_alpha = "1", d_a2 = "1", d_route = "cauchy";
    int d_order = 8;
    std::vector<CLI::App*> dist_cmds;
    for (const char* name : {"cumulants", "moments", "negmoments"}) {
        auto* c = dist->add_subcommand(name);
        c->add_option("--law", law)->check(CLI::IsMember({"free_poisson", "inverse_free_poisson", "std_free_gamma"}));
        c->add_option("--lambda", d_lambda);
        c->add_option("--alpha", d_alpha);
        c->add_option("--a2", d_a2, "a^2 for the standardized free gamma law");
        c->add_option("--order", d_order)->check(CLI::Range(0, 40));
        c->add_option("--route", d_route)->check(CLI::IsMember({"cumulant", "cauchy"}));
        dist_cmds.push_back(c);
    }

    // cumulant
    auto* cum = app.add_subcommand("cumulant", "Mixed cumulant R_n(e_1, ..., e_n) of expressions in X, Xi, Y, I");
    std::vector<std::string> slots;
    std::string c_lambda = "2", c_kappa = "1", c_alpha = "1", y_law = "free_poisson";
    cum->add_option("slots", slots)->required();
    cum->add_option("--lambda", c_lambda);
    cum->add_option("--kappa", c_kappa);
    cum->add_option("--alpha", c_alpha);
    cum->add_option("--y-law", y_law)->check(CLI::IsMember({"free_poisson", "semicircle"}));

    // verify
    auto* verify = app.add_subcommand("verify", "Verification suite");
    verify->require_subcommand(1);
    std::vector<std::string> v_lambda, v_kappa, v_r1x;
    std::string v_alpha = "1", v_grid = "default";
    int v_max_order = 4, v_max_len = 8, v_n_max = 10;
    bool no_control = false;
    auto* v_prop31 = verify->add_subcommand("prop31", "Joint cumulants of X and X^{-1} vs the closed form");
    v_prop31->add_option("--lambda", v_lambda)->delimiter(',');
    v_prop31->add_option("--alpha", v_alpha);
    v_prop31->add_option("--max-len", v_max_len)->check(CLI::Range(1, 12));
    auto* v_lukacs = verify->add_subcommand("lukacs", "Vanishing mixed cumulants of X^{-1}Y and X+Y");
    v_lukacs->add_option("--lambda", v_lambda)->delimiter(',');
    v_lukacs->add_option("--kappa", v_kappa)->delimiter(',');
    v_lukacs->add_option("--alpha", v_alpha);
    v_lukacs->add_option("--max-order", v_max_order);
    v_lukacs->add_option("--grid", v_grid, "default (5x3) or certify (5x5)")
        ->check(CLI::IsMember({"default", "certify"}));
    v_lukacs->add_flag("--no-control", no_control, "Skip the semicircle negative control");
    auto* v_remark = verify->add_subcommand("remark32", "Inverse cumulants derived from R_1(X) alone");
    v_remark->add_option("--r1x", v_r1x)->delimiter(',');
    v_remark->add_option("--n-max", v_n_max)->check(CLI::Range(1, 12));
    auto* v_gamma = verify->add_subcommand("gamma", "Free gamma counterexample");
    v_gamma->add_option("--lambda", v_lambda)->delimiter(',');

    // oracle
    auto* orc = app.add_subcommand("oracle", "Random-matrix Monte Carlo");
    orc->require_subcommand(1);
    oracle::EnsembleSpec spec;
    int o_order = 2, o_max_m = 4;
    bool use_sqrt = false;
    std::vector<std::string> patterns;
    std::string o_lambda = "2", o_kappa = "1", o_alpha = "1";
    std::vector<CLI::App*> oracle_cmds;
    auto* o_moments = orc->add_subcommand("moments", "Empirical moments of X against exact values");
    auto* o_mixed = orc->add_subcommand("mixed", "Empirical mixed cumulants of U and V");
    for (auto* c : {o_moments, o_mixed}) {
        c->add_option("--dim", spec.dim)->check(CLI::Range(2, 4000));
        c->add_option("--lambda", o_lambda);
        c->add_option("--kappa", o_kappa);
        c->add_option("--alpha", o_alpha);
        c->add_option("--samples", spec.samples)->check(CLI::PositiveNumber);
        c->add_option("--seed", cfg.seed);
    }
    o_moments->add_option("--max-m", o_max_m)->check(CLI::Range(1, 8));
    o_mixed->add_option("--order", o_order)->check(CLI::Range(2, 4));
    o_mixed->add_option("--pattern", patterns)->delimiter(',');
    o_mixed->add_flag("--use-sqrt", use_sqrt, "Form U with V^{-1/2}; otherwise use W = X^{-1}(X+Y)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (nc->parsed()) {
            if (nc_count->parsed()) {
                if (nc_n < 0)
                    throw std::domain_error("n must be >= 0");
                BigInt c = catalan(static_cast<unsigned>(nc_n));
                if (cfg.output() == Format::json)
                    out << nlohmann::json({{"n", nc_n}, {"count", c.get_str()}}).dump() << "\n";
                else
                    out << c.get_str() << "\n";
            } else if (nc_list->parsed()) {
                auto all = enumerate_nc(nc_n);
                if (cfg.output() == Format::json) {
                    nlohmann::json j = nlohmann::json::array();
                    for (const auto& p : all)
                        j.push_back(to_json(p));
                    out << j.dump() << "\n";
                } else {
                    for (const auto& p : all)
                        out << to_string(p) << "\n";
                }
            } else {
                Partition p = parse_partition(nc_part);
                Partition k = kreweras(p);
                if (cfg.output() == Format::json)
                    out << nlohmann::json({{"partition", to_json(p)}, {"kreweras", to_json(k)}}).dump() << "\n";
                else
                    out << to_string(k) << "\n";
            }
        } else if (dist->parsed()) {
            if (law == "std_free_gamma") {
                Rational a2 = parse_rational(d_a2);
                nlohmann::json j;
                j["law"] = "std_free_gamma";
                j["a2"] = to_string(a2);
                if (!dist_cmds[0]->parsed())
                    throw std::domain_error("std_free_gamma supports only `dist cumulants`");
                std::vector<std::string> coeffs;
                std::vector<bool> odd;
                for (int k = 1; k <= d_order; ++k) {
                    auto v = std_free_gamma_cumulant(k, a2);
                    coeffs.push_back(to_string(v.coefficient));
                    odd.push_back(v.odd_power);
                }
                j["cumulants"] = coeffs;
                j["odd_power"] = odd;
                detail::emit_sequence(j, "cumulants", cfg, out);
            } else {
                FreePoissonParams p(parse_rational(d_lambda), parse_rational(d_alpha));
                const bool inverse = law == "inverse_free_poisson";
                Law which = inverse ? Law::inverse_free_poisson : Law::free_poisson;
                std::vector<Rational> values;
                std::string key;
                int offset = 1;
                if (dist_cmds[0]->parsed()) {
                    key = "cumulants";
                    for (int k = 1; k <= d_order; ++k)
                        values.push_back(inverse ? inv_fp_cumulant(k, p) : fp_cumulant(k, p));
                } else if (dist_cmds[1]->parsed()) {
                    key = "moments";
                    offset = 0;
                    for (int m = 0; m <= d_order; ++m)
                        values.push_back(inverse ? negative_moment(m, p, NegativeMomentRoute::cumulant) : fp_moment(m, p));
                } else {
                    key = "negative_moments";
                    offset = 0;
                    if (inverse)
                        throw std::domain_error("negmoments is defined for law free_poisson");
                    auto route = d_route == "cumulant" ? NegativeMomentRoute::cumulant : NegativeMomentRoute::cauchy;
                    if (route == NegativeMomentRoute::cauchy)
                        values = negative_moments_cauchy(d_order, p);
                    else
                        for (int m = 0; m <= d_order; ++m)
                            values.push_back(negative_moment(m, p, route));
                }
                auto j = sequence_json(which, p, key, values);
                j["offset"] = offset;
                detail::emit_sequence(j, key, cfg, out);
            }
        } else if (cum->parsed()) {
            Rational lambda = parse_rational(c_lambda), kappa = parse_rational(c_kappa), alpha = parse_rational(c_alpha);
            FreeModel m;
            m.add_family(free_poisson_family("X", FreePoissonParams(lambda, alpha)));
            if (y_law == "semicircle")
                m.add_family(semicircle_family("Y"));
            else
                m.add_family(free_poisson_family("Y", FreePoissonParams(kappa, alpha)));
            std::vector<Expr> exprs;
            for (const auto& s : slots)
                exprs.push_back(parse_expr(s, m));
            Engine engine(std::move(m));
            Rational value = engine.expr_mixed_cumulant(exprs);
            std::string query = "R_" + std::to_string(exprs.size()) + "(";
            for (std::size_t i = 0; i < exprs.size(); ++i)
                query += (i ? ", " : "") + engine.model().expr_name(exprs[i]);
            query += ")";
            switch (cfg.output()) {
            case Format::json: {
                nlohmann::json j;
                j["query"] = query;
                j["slots"] = slots;
                j["parameters"] = {{"lambda", to_string(lambda)},
                                   {"kappa", to_string(kappa)},
                                   {"alpha", to_string(alpha)},
                                   {"y_law", y_law}};
                j["value"] = to_string(value);
                out << j.dump(2) << "\n";
                break;
            }
            case Format::csv:
                out << "query,value\n" << csv_field(query) << "," << to_string(value) << "\n";
                break;
            case Format::table:
                out << query << " = " << to_string(value) << "\n";
                break;
            }
        } else if (verify->parsed()) {
            std::vector<VerificationReport> reports;
            const Rational alpha = parse_rational(v_alpha);
            if (v_prop31->parsed()) {
                for (const auto& l : detail::or_default(v_lambda, {2, 3, Rational(7, 2)}))
                    reports.push_back(prop31_sweep(l, v_max_len, alpha, cfg.jobs));
            } else if (v_lukacs->parsed()) {
                LukacsOptions opts;
                opts.jobs = cfg.jobs;
                opts.negative_control = !no_control;
                std::vector<Rational> kappas = default_kappa_grid();
                if (v_grid == "certify")
                    kappas = {1, Rational(3, 2), 2, Rational(5, 2), 3};
                reports = lukacs_grid(detail::or_default(v_lambda, default_lambda_grid()),
                                      detail::or_default(v_kappa, kappas), alpha, v_max_order, opts);
            } else if (v_remark->parsed()) {
                for (const auto& r : detail::or_default(v_r1x, {2, 3, Rational(3, 2)}))
                    reports.push_back(remark32_check(r, v_n_max));
            } else {
                for (const auto& l : detail::or_default(v_lambda, {2, 3, Rational(7, 2)}))
                    reports.push_back(gamma_counterexample(l));
            }
            result = detail::emit_reports(reports, cfg, out);
        } else if (orc->parsed()) {
            spec.lambda = parse_rational(o_lambda).get_d();
            spec.kappa = parse_rational(o_kappa).get_d();
            spec.alpha = parse_rational(o_alpha).get_d();
            spec.seed = cfg.seed;
            spec.validate();
            nlohmann::json j;
            bool pass = true;
            if (o_moments->parsed()) {
                FreePoissonParams exact(parse_rational(o_lambda), parse_rational(o_alpha));
                auto est = oracle::empirical_moments(spec, o_max_m);
                j["d"] = spec.dim;
                j["samples"] = spec.samples;
                j["seed"] = spec.seed;
                j["moments"] = nlohmann::json::array();
                for (int m = 1; m <= o_max_m; ++m) {
                    const auto& e = est[static_cast<std::size_t>(m - 1)];
                    double x = fp_moment(m, exact).get_d();
                    auto status = oracle::soft_bound_status(e.mean, x, spec);
                    pass = pass && status != oracle::BoundStatus::exceeded;
                    j["moments"].push_back({{"m", m},
                                            {"estimate", e.mean},
                                            {"stderr", e.stderr_},
                                            {"exact", x},
                                            {"status", oracle::to_string(status)}});
                }
                j["tolerance_note"] = "soft bound 5*max(1,|exact|)/sqrt(samples*d); flagged up to 2x, exceeded beyond";
            } else {
                std::vector<std::string> pats = patterns;
                if (pats.empty())
                    pats = mixed_patterns(o_order);
                j["results"] = nlohmann::json::array();
                for (const auto& p : pats) {
                    auto e = oracle::empirical_mixed_cumulant(spec, p, use_sqrt);
                    auto row = oracle::to_json(e);
                    bool within = std::abs(e.estimate) <= 3.0 * e.stderr_;
                    row["within_3se"] = within;
                    pass = pass && within;
                    j["results"].push_back(row);
                }
                j["tolerance_note"] = "theory predicts 0; pass means |estimate| <= 3 standard errors";
            }
            j["pass"] = pass;
            if (cfg.output() == Format::json) {
                out << j.dump(2) << "\n";
            } else if (o_moments->parsed()) {
                if (cfg.output() == Format::csv)
                    out << "m,estimate,stderr,exact,status\n";
                for (const auto& r : j["moments"]) {
                    if (cfg.output() == Format::csv)
                        out << r["m"] << "," << r["estimate"] << "," << r["stderr"] << "," << r["exact"] << ","
                            << r["status"].get<std::string>() << "\n";
                    else
                        out << "phi(X^" << r["m"] << ") = " << r["estimate"] << " +- " << r["stderr"] << "  exact "
                            << r["exact"] << "  [" << r["status"].get<std::string>() << "]\n";
                }
            } else {
                if (cfg.output() == Format::csv)
                    out << "pattern,estimate,stderr,d,within_3se\n";
                for (const auto& r : j["results"]) {
                    if (cfg.output() == Format::csv)
                        out << r["pattern"].get<std::string>() << "," << r["estimate"] << "," << r["stderr"] << ","
                            << r["d"] << "," << r["within_3se"] << "\n";
                    else
                        out << r["pattern"].get<std::string>() << ": " << r["estimate"] << " +- " << r["stderr"]
                            << "  (d=" << r["d"] << ")" << (r["within_3se"].get<bool>() ? "" : "  OUTSIDE 3 SE")
                            << "\n";
                }
            }
            result = pass ? kExitPass : kExitFail;
        }
    } catch (const ParseError& e) {
        err << "usage error: malformed rational '" << e.token() << "'\n";
        return kExitUsage;
    } catch (const ExactPathUnavailable& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NonInvertibleError& e) {
        err << "domain error: " << e.what() << "; the random-matrix oracle (`oracle mixed --use-sqrt`) covers "
            << "non-invertible X\n";
        return kExitUsage;
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return result;
}

}  // namespace freecum::cli
