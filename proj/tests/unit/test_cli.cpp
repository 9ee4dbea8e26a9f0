#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lpconc/commands.hpp"

using namespace lpconc;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir = LPCONC_TEST_DATA;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("lpconc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    // Two small datasets, referenced by absolute path.
    std::string small_manifest() const {
        nlohmann::json m = nlohmann::json::array();
        for (const char* name : {"gauss_mix_310x6", "gauss_mix_748x4"}) {
            m.push_back({{"name", name},
                         {"csv_path", (data_dir / (std::string(name) + ".csv")).string()},
                         {"label_column", "class"},
                         {"positive_labels", {"1"}},
                         {"drop_columns", nlohmann::json::array()}});
        }
        const auto p = path("manifest.json").string();
        std::ofstream(p) << m.dump(2);
        return p;
    }

    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

int run(const cli::RunConfig& cfg, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o;
    std::ostringstream e;
    const int code = cli::run(cfg, o, e);
    if (out) {
        *out = o.str();
    }
    if (err) {
        *err = e.str();
    }
    return code;
}

int shell(const std::string& args) {
    const std::string cmd = std::string("\"") + LPCONC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::vector<QualityRecord> synthetic_grid(std::size_t datasets, bool identical) {
    std::vector<QualityRecord> out;
    for (std::size_t d = 0; d < datasets; ++d) {
        for (auto mode : all_preprocess_modes) {
            const auto ps = canonical_exponents();
            for (std::size_t i = 0; i < ps.size(); ++i) {
                QualityRecord r;
                r.dataset = "db" + std::to_string(d);
                r.preprocessing = mode;
                r.p = ps[i];
                r.n = 300 + 10 * d;
                r.n_pos = 100;
                const double acc = identical ? 0.8 : 0.7 + 0.01 * static_cast<double>((i * 7 + d * 3) % 11);
                r.accuracy = acc;
                r.sensitivity = acc;
                r.specificity = acc - 0.05;
                r.tnnsc = static_cast<std::size_t>(acc * 11.0 * static_cast<double>(r.n));
                out.push_back(r);
            }
        }
    }
    return out;
}

} // namespace

TEST_F(Cli, Table1ShapeAndDeterminism) {
    cli::RunConfig cfg;
    cfg.command = "table1";
    cfg.seed = 3;
    cfg.reps = 20;
    std::string a;
    std::string b;
    ASSERT_EQ(run(cfg, &a), cli::exit_ok);
    ASSERT_EQ(run(cfg, &b), cli::exit_ok);
    EXPECT_EQ(a, b);
    const auto rows = lines(a);
    ASSERT_EQ(rows.size(), 1u + 8u * 3u);
    EXPECT_EQ(rows[0], "dim,k_points,reps,fraction");
    EXPECT_EQ(rows[1], "1,10,20,0.000000");
    EXPECT_EQ(rows[2], "1,20,20,0.000000");
    EXPECT_EQ(rows[3], "1,100,20,0.000000");
    EXPECT_EQ(rows[4].substr(0, 8), "2,10,20,");

    cfg.seed = 1000;
    std::string c;
    ASSERT_EQ(run(cfg, &c), cli::exit_ok);
    EXPECT_NE(a, c);
}

TEST_F(Cli, ConcentrationRowCount) {
    cli::RunConfig cfg;
    cfg.command = "concentration";
    cfg.seed = 1;
    cfg.n = 50;
    cfg.dims = {1, 2, 7};
    cfg.out = path("conc.csv").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    const auto rows = lines(slurp(cfg.out));
    ASSERT_EQ(rows.size(), 1u + 3u * 8u);
    EXPECT_EQ(rows[0], "dim,p,rc,cv");
    EXPECT_EQ(rows[1].substr(0, 7), "1,0.01,");
    EXPECT_EQ(rows[8].substr(0, 6), "1,inf,");
    EXPECT_EQ(cli::paper_concentration_dims().size(), 44u);
}

TEST_F(Cli, Gen) {
    cli::RunConfig cfg;
    cfg.command = "gen";
    cfg.seed = 9;
    cfg.n = 5;
    cfg.dims = {3};
    std::string out;
    ASSERT_EQ(run(cfg, &out), cli::exit_ok);
    const auto rows = lines(out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "x1,x2,x3");
    const auto x = gen_uniform_cube(5, 3, 9);
    EXPECT_EQ(std::stod(rows[1].substr(0, rows[1].find(','))), x(0, 0));
}

TEST_F(Cli, InvalidArgumentsExitNonZero) {
    cli::RunConfig cfg;
    cfg.command = "gen";
    std::string err;
    EXPECT_EQ(run(cfg, nullptr, &err), cli::exit_error);
    EXPECT_NE(err.find("--seed"), std::string::npos);
    cfg.command = "nope";
    EXPECT_EQ(run(cfg), cli::exit_error);
    cfg.command = "compare";
    cfg.in = path("missing.json").string();
    EXPECT_EQ(run(cfg), cli::exit_error);

    EXPECT_EQ(shell("gen --n 3 --dims 2"), 1);
    EXPECT_EQ(shell("bogus"), 1);
    EXPECT_EQ(shell("table1 --seed 1 --ps 0"), 1);
    EXPECT_EQ(shell("concentration --seed 1 --scale huge"), 1);
    EXPECT_EQ(shell("gen --seed 1 --n 3 --dims 2"), 0);
    EXPECT_EQ(shell("--help"), 0);
}

TEST_F(Cli, DimsWritesRowsAndAnalysis) {
    cli::RunConfig cfg;
    cfg.command = "dims";
    cfg.manifest = (data_dir / "manifest.json").string();
    cfg.out = path("dims.csv").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    const auto rows = lines(slurp(cfg.out));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "name,n_attr,cases,pca_k,pca_bs,pca_cn,sep_d,frac_d");
    EXPECT_EQ(rows[1].substr(0, 21), "breast_cancer,30,569,");

    const auto analysis = nlohmann::json::parse(slurp(cfg.out + ".analysis.json"));
    ASSERT_EQ(analysis["correlation"].size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        ASSERT_EQ(analysis["correlation"][i].size(), 6u);
        if (!analysis["correlation"][i][i].is_null()) {
            EXPECT_NEAR(analysis["correlation"][i][i].get<double>(), 1.0, 1e-12);
        }
    }
    EXPECT_TRUE(analysis.contains("slopes_through_origin"));
    EXPECT_EQ(analysis["preprocessing"], "empty");

    cfg.modes = {PreprocessMode::standardise};
    cfg.out = path("dims_std.csv").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    EXPECT_EQ(lines(slurp(cfg.out))[1].substr(0, 27), "breast_cancer,30,569,6,3,5,");
    EXPECT_EQ(nlohmann::json::parse(slurp(cfg.out + ".analysis.json"))["preprocessing"], "std");
}

TEST_F(Cli, KnnEvalAndResume) {
    cli::RunConfig cfg;
    cfg.command = "knn-eval";
    cfg.manifest = small_manifest();
    cfg.out = path("results.json").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    const auto first = slurp(cfg.out);
    const auto records = nlohmann::json::parse(first).get<std::vector<QualityRecord>>();
    ASSERT_EQ(records.size(), 48u);
    EXPECT_EQ(records.front().dataset, "gauss_mix_310x6");
    EXPECT_EQ(records.back().dataset, "gauss_mix_748x4");
    EXPECT_TRUE(records.back().p.is_infinite());

    ASSERT_EQ(run(cfg), cli::exit_ok);
    EXPECT_EQ(slurp(cfg.out), first);

    // drop a cell; resume recomputes exactly that cell
    auto partial = nlohmann::json::parse(first);
    partial.erase(partial.begin() + 5);
    std::ofstream(cfg.out) << partial.dump(2);
    ASSERT_EQ(run(cfg), cli::exit_ok);
    EXPECT_EQ(slurp(cfg.out), first);
}

TEST_F(Cli, KnnEvalReportsPartialFailure) {
    nlohmann::json m = nlohmann::json::parse(slurp(small_manifest()));
    m.push_back({{"name", "missing"},
                 {"csv_path", path("nowhere.csv").string()},
                 {"label_column", "class"},
                 {"positive_labels", {"1"}},
                 {"drop_columns", nlohmann::json::array()}});
    std::ofstream(path("m2.json")) << m.dump();
    cli::RunConfig cfg;
    cfg.command = "knn-eval";
    cfg.manifest = path("m2.json").string();
    cfg.out = path("results.json").string();
    cfg.ps = {1.0, 2.0};
    std::string err;
    EXPECT_EQ(run(cfg, nullptr, &err), cli::exit_partial);
    EXPECT_NE(err.find("missing"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(slurp(cfg.out)).size(), 12u);
}

TEST(Compare, TablesFromSyntheticGrid) {
    const auto rep = cli::build_comparison(synthetic_grid(6, false));
    EXPECT_EQ(rep.datasets.size(), 6u);
    EXPECT_EQ(rep.exponents.size(), 8u);
    EXPECT_EQ(rep.json["friedman"].size(), 9u);
    EXPECT_EQ(rep.json["wilcoxon_exponents"].size(), 9u);
    for (const auto& row : rep.json["wilcoxon_exponents"]) {
        EXPECT_EQ(row["p_values"].size(), 3u);
    }
    EXPECT_EQ(rep.json["wilcoxon_preprocessing"].size(), 9u);
    EXPECT_EQ(rep.json["frequency"].size(), 9u);
    EXPECT_NEAR(rep.json["nemenyi_cd"].get<double>(), nemenyi_cd(8, 6), 1e-15);
    EXPECT_NE(rep.markdown.find("## Friedman test and post hoc Nemenyi test"), std::string::npos);
    EXPECT_NE(rep.markdown.find("| 0.5 & 1 | 0.5 & 2 | 1 & 2 |"), std::string::npos);
    EXPECT_EQ(cli::build_comparison(synthetic_grid(6, false)).markdown, rep.markdown);
}

TEST(Compare, IdenticalGridIsNotSignificant) {
    const auto rep = cli::build_comparison(synthetic_grid(4, true));
    for (const auto& f : rep.json["friedman"]) {
        EXPECT_EQ(f["p_value"].get<double>(), 1.0);
        EXPECT_FALSE(f["significant"].get<bool>());
        EXPECT_EQ(f["insignificantly_different"].size(), 8u);
    }
    for (const auto& w : rep.json["wilcoxon_exponents"]) {
        for (const auto& p : w["p_values"]) {
            EXPECT_EQ(p.get<double>(), 1.0);
        }
    }
}

TEST(Compare, RejectsIncompleteOrDuplicateGrid) {
    auto grid = synthetic_grid(3, false);
    grid.erase(grid.begin() + 4);
    try {
        cli::build_comparison(grid);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("db0/empty/"), std::string::npos);
    }
    auto dup = synthetic_grid(3, false);
    dup.push_back(dup.front());
    EXPECT_THROW(cli::build_comparison(dup), Error);
    EXPECT_THROW(cli::build_comparison(synthetic_grid(1, false)), Error);
}

TEST_F(Cli, CompareIsByteDeterministic) {
    const auto in = path("grid.json").string();
    std::ofstream(in) << nlohmann::json(synthetic_grid(5, false)).dump(2);
    cli::RunConfig cfg;
    cfg.command = "compare";
    cfg.in = in;
    cfg.out = path("a.md").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    cfg.out = path("b.md").string();
    ASSERT_EQ(run(cfg), cli::exit_ok);
    EXPECT_EQ(slurp(path("a.md")), slurp(path("b.md")));
    EXPECT_EQ(slurp(path("a.md.json")), slurp(path("b.md.json")));
    EXPECT_FALSE(slurp(path("a.md")).empty());
}
