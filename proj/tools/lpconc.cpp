// lpconc: command-line driver for the l_p concentration and kNN pipeline.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lpconc/commands.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto trimmed = lpconc::detail::trim(item);
        if (!trimmed.empty()) {
            out.emplace_back(trimmed);
        }
    }
    return out;
}

std::vector<std::size_t> parse_counts(const std::string& flag, const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) {
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc{} || ptr != item.data() + item.size() || value == 0) {
            throw lpconc::Error(flag + ": '" + item + "' is not a positive integer");
        }
        out.push_back(value);
    }
    if (out.empty()) {
        throw lpconc::Error(flag + ": empty list");
    }
    return out;
}

struct RawFlags {
    std::string dims;
    std::string ps;
    std::string points;
    std::string preprocess;
    std::string scale = "desk";
};

void add_common(CLI::App* sub, lpconc::cli::RunConfig& cfg, RawFlags& raw) {
    sub->add_option("--seed", cfg.seed, "RNG seed (required by gen, table1, concentration)");
    sub->add_option("--n", cfg.n, "number of points");
    sub->add_option("--dims", raw.dims, "comma-separated dimensions");
    sub->add_option("--ps", raw.ps, "comma-separated exponents, 'inf' allowed");
    sub->add_option("--k", cfg.k, "neighbours for kNN (default 11)");
    sub->add_option("--scale", raw.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--manifest", cfg.manifest, "dataset manifest (JSON)");
    sub->add_option("--in", cfg.in, "results JSON from knn-eval");
    sub->add_option("--out", cfg.out, "output path (stdout when omitted, where allowed)");
    sub->add_option("--preprocess", raw.preprocess, "empty, std, minmax or all");
    sub->add_option("--points", raw.points, "table1: comma-separated point counts");
    sub->add_option("--reps", cfg.reps, "table1: repetitions (default 1000)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"l_p distance concentration and kNN comparison pipeline"};
    app.require_subcommand(1);

    lpconc::cli::RunConfig cfg;
    RawFlags raw;
    const std::pair<const char*, const char*> commands[] = {
        {"gen", "uniform unit-cube sample as CSV"},
        {"table1", "fraction of samples with RC(l1) > RC(l2)"},
        {"concentration", "RC and CV of pairwise distances per dimension and exponent"},
        {"dims", "intrinsic dimension estimates for manifest datasets"},
        {"knn-eval", "leave-one-out kNN quality grid (resumable JSON)"},
        {"compare", "frequency, Friedman/Nemenyi and Wilcoxon report"},
    };
    for (const auto& [name, help] : commands) {
        add_common(app.add_subcommand(name, help), cfg, raw);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lpconc::cli::exit_error;
    }

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        cfg.scale = raw.scale == "paper" ? lpconc::cli::Scale::paper : lpconc::cli::Scale::desk;
        if (!raw.dims.empty()) {
            cfg.dims = parse_counts("--dims", raw.dims);
        }
        if (!raw.points.empty()) {
            cfg.points = parse_counts("--points", raw.points);
        }
        if (!raw.ps.empty()) {
            for (const auto& item : split_list(raw.ps)) {
                cfg.ps.push_back(lpconc::LpExponent::parse(item));
            }
        }
        if (raw.preprocess == "all") {
            cfg.modes.assign(std::begin(lpconc::all_preprocess_modes), std::end(lpconc::all_preprocess_modes));
        } else if (!raw.preprocess.empty()) {
            cfg.modes.push_back(lpconc::parse_preprocess_mode(raw.preprocess));
        }
    } catch (const std::exception& e) {
        std::cerr << "lpconc: " << e.what() << '\n';
        return lpconc::cli::exit_error;
    }
    return lpconc::cli::run(cfg, std::cout, std::cerr);
}
