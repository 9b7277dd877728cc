// wmonlab command-line front-end: parse instance/mechanism files, dispatch to
// the library, emit JSON/CSV reports with CI-friendly exit codes
// (0 success / property holds, 2 property violated, 1 usage or IO error).

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wmonlab/json_io.hpp"

namespace {

using wmonlab::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolated = 2;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wmonlab::BadParameters("cannot open " + path);
    json j;
    in >> j;
    return j;
}

std::vector<double> parse_grid(const std::string& spec) {
    double start, stop, step;
    char c1, c2;
    std::istringstream in(spec);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0)
        throw wmonlab::BadParameters("grid: expected start:stop:step with positive step");
    std::vector<double> out;
    for (double x = start; x <= stop + 1e-12; x += step) out.push_back(x);
    return out;
}

std::vector<double> parse_list(const std::string& spec) {
    std::vector<double> out;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    return out;
}

wmonlab::TwoTaskValuation parse_t(const std::string& spec) {
    const auto v = parse_list(spec);
    if (v.size() == 2) return wmonlab::TwoTaskValuation::additive(v[0], v[1]);
    if (v.size() == 3) return {v[0], v[1], v[2]};
    throw wmonlab::BadParameters("--t: expected t1,t2 or t1,t2,t12");
}

wmonlab::AdditiveBid parse_s(const std::string& spec) {
    const auto v = parse_list(spec);
    if (v.size() != 2) throw wmonlab::BadParameters("--s: expected s1,s2");
    return {v[0], v[1]};
}

void emit(const std::string& text, const std::string& out_path) {
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw wmonlab::BadParameters("cannot write " + out_path);
        out << text << "\n";
    }
}

std::string family_name(const wmonlab::MechanismSpec& spec) {
    return wmonlab::mechanism_to_json(spec).at("type").get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace wmonlab;

    CLI::App app{"truthful-mechanism taxonomy, monotonicity checks, and lower-bound pipeline"};
    app.require_subcommand(1);

    double eps = 1e-9, bisect_tol = 1e-7, fit_tol = 1e-6;
    std::uint64_t seed = 1;
    std::string out_path;
    app.add_option("--eps", eps, "comparison tolerance");
    app.add_option("--bisect-tol", bisect_tol, "binary-search tolerance");
    app.add_option("--fit-tol", fit_tol, "boundary-fit tolerance");
    app.add_option("--seed", seed, "seed for randomized probes");
    app.add_option("--out", out_path, "also write the report to this file");

    std::string mech_path, t_spec, s_spec, grid_spec = "0:1:0.25";

    auto* cmd_eval = app.add_subcommand("eval", "evaluate a mechanism on one bid profile");
    cmd_eval->add_option("--mech", mech_path, "mechanism JSON")->required();
    cmd_eval->add_option("--t", t_spec, "t-player bid t1,t2[,t12]")->required();
    cmd_eval->add_option("--s", s_spec, "s-player bid s1,s2")->required();

    int player = 0;
    int random_count = 0;
    double t_max = 2.0, s_max = 2.0, eps_band = 0.0;
    auto* cmd_wmon = app.add_subcommand("wmon-check", "weak-monotonicity probe suite");
    cmd_wmon->add_option("--mech", mech_path)->required();
    cmd_wmon->add_option("--grid", grid_spec, "per-axis grid start:stop:step");
    cmd_wmon->add_option("--player", player, "0 = t-player, 1 = s-player");
    cmd_wmon->add_option("--random", random_count, "extra seeded random probes");
    cmd_wmon->add_option("--t-max", t_max);
    cmd_wmon->add_option("--s-max", s_max);
    cmd_wmon->add_option("--eps-band", eps_band, "t12 deviation band for random probes");

    auto* cmd_pay = app.add_subcommand("payments", "recover virtual payments by probing");
    cmd_pay->add_option("--mech", mech_path)->required();
    cmd_pay->add_option("--s", s_spec, "fixed s-player bid s1,s2")->required();

    auto* cmd_classify = app.add_subcommand("classify", "region-figure classification");
    cmd_classify->add_option("--mech", mech_path)->required();
    cmd_classify->add_option("--s", s_spec, "fixed s-player bid s1,s2")->required();

    int task = 1;
    double s_other = 1.0, t_other = 0.0;
    std::string sweep_spec = "0:2:0.25";
    auto* cmd_fit = app.add_subcommand("fit-boundary", "scan and fit a task boundary");
    cmd_fit->add_option("--mech", mech_path)->required();
    cmd_fit->add_option("--task", task, "task index (1 or 2)");
    cmd_fit->add_option("--sweep", sweep_spec, "own-s sweep start:stop:step");
    cmd_fit->add_option("--s-other", s_other);
    cmd_fit->add_option("--t-other", t_other);

    std::string phi_path, eta_path;
    double residual_threshold = 1e-12;
    auto* cmd_ident = app.add_subcommand("identity-residual",
                                         "truthful-extension identity residual");
    cmd_ident->add_option("--phi", phi_path, "curve JSON")->required();
    cmd_ident->add_option("--eta", eta_path, "curve JSON")->required();
    cmd_ident->add_option("--t", t_spec, "bid t1,t2,t12")->required();
    cmd_ident->add_option("--threshold", residual_threshold, "violation threshold");

    int n = 10;
    double delta = 0.3, delta0 = 1e-6;
    std::string format = "json";
    auto* cmd_adv = app.add_subcommand("adversary", "lower-bound adversary pipeline");
    cmd_adv->add_option("--mech", mech_path)->required();
    cmd_adv->add_option("--n", n, "machine count")->required();
    cmd_adv->add_option("--delta", delta);
    cmd_adv->add_option("--delta0", delta0, "triviality threshold");
    cmd_adv->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

    std::string family = "bundling";
    double B = 400.0;
    auto* cmd_high = app.add_subcommand("high-approx", "high-approximation witness");
    cmd_high->add_option("--mech", mech_path)->required();
    cmd_high->add_option("--family", family)
        ->check(CLI::IsMember({"bundling", "constant", "degenerate"}));
    cmd_high->add_option("--B", B, "domain bound");

    CLI11_PARSE(app, argc, argv);
    EPS_CMP = eps;

    try {
        if (cmd_eval->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            const Alloc a = oracle(parse_t(t_spec), parse_s(s_spec));
            emit(json{{"alloc", to_string(a)}}.dump(), out_path);
            return kExitOk;
        }
        if (cmd_wmon->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            auto probes = exhaustive_grid_probes(player, parse_grid(grid_spec));
            if (random_count > 0) {
                const auto extra =
                    random_probes(player, seed, random_count, t_max, s_max, eps_band);
                probes.insert(probes.end(), extra.begin(), extra.end());
            }
            const auto witness = wmon_check(oracle, player, probes);
            json report{{"probes", probes.size()}, {"violations", witness ? 1 : 0}};
            if (witness) report["witness"] = witness_to_json(*witness);
            emit(report.dump(), out_path);
            return witness ? kExitViolated : kExitOk;
        }
        if (cmd_pay->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            const AdditiveBid s = parse_s(s_spec);
            const double ceiling = default_probe_ceiling({0, 0, 0}, s);
            const auto p = virtual_payments(fix_s(oracle, s), ceiling, bisect_tol);
            emit(payments_to_json(p).dump(), out_path);
            return kExitOk;
        }
        if (cmd_classify->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            const AdditiveBid s = parse_s(s_spec);
            const double ceiling = default_probe_ceiling({0, 0, 0}, s);
            const auto cp = critical_profile(fix_s(oracle, s), ceiling, bisect_tol);
            json report = critical_profile_to_json(cp);
            report["figure"] = to_string(classify_figure(cp, bisect_tol));
            emit(report.dump(), out_path);
            return kExitOk;
        }
        if (cmd_fit->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            const auto sweep = parse_grid(sweep_spec);
            const double ceiling =
                10.0 * (sweep.back() + s_other + t_other + 1.0) + 10.0;
            const auto samples =
                boundary_scan(oracle, task, sweep, s_other, t_other, ceiling);
            const auto fit = fit_truncated_affine(samples, fit_tol);
            json report{{"lambda", fit.lambda},
                        {"gamma", fit.gamma},
                        {"max_residual", fit.max_residual},
                        {"linear", fit.linear}};
            emit(report.dump(), out_path);
            return fit.linear ? kExitOk : kExitViolated;
        }
        if (cmd_ident->parsed()) {
            const auto phi = curve_from_json(load_json(phi_path), "phi");
            const auto eta = curve_from_json(load_json(eta_path), "eta");
            const double residual = extension_identity_residual(phi, eta, parse_t(t_spec));
            emit(json{{"residual", residual}}.dump(), out_path);
            return residual > residual_threshold ? kExitViolated : kExitOk;
        }
        if (cmd_adv->parsed()) {
            const MechanismSpec spec = mechanism_from_json(load_json(mech_path));
            const auto report = adversary(instance_oracle(spec), n, {delta, delta0, fit_tol});
            const std::string text = format == "csv"
                                         ? adversary_report_to_csv(report, n, family_name(spec))
                                         : adversary_report_to_json(report).dump();
            emit(text, out_path);
            return report.failed() ? kExitViolated : kExitOk;
        }
        if (cmd_high->parsed()) {
            const auto oracle = two_player_oracle(mechanism_from_json(load_json(mech_path)));
            const HighApproxKind kind = family == "bundling" ? HighApproxKind::Bundling
                                        : family == "constant"
                                            ? HighApproxKind::Constant
                                            : HighApproxKind::DegenerateOneTask;
            emit(high_approx_to_json(high_approx_witness(kind, oracle, B)).dump(), out_path);
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
