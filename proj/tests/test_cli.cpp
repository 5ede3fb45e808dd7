#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"

using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "stein_prelimit");
    std::ostringstream out, err;
    const int code = stein::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("stein_cli_" + name);
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == stein::cli::kUsage);
    CHECK(run({"bogus"}).code == stein::cli::kUsage);
    CHECK(run({"interp", "--x", "notanumber"}).code == stein::cli::kUsage);
    CHECK(run({"couple", "--k", "3"}).code == stein::cli::kUsage);  // missing seed
    CHECK(run({"interp", "--demo", "quintic", "--x", "1"}).code == stein::cli::kUsage);
    const auto r = run({"convergence", "--rhos", "0.5", "1.2"});
    CHECK(r.code == stein::cli::kUsage);
    CHECK(r.err.find("rho") != std::string::npos);
}

TEST_CASE("help and version") {
    const auto h = run({"--help"});
    CHECK(h.code == 0);
    CHECK(h.out.find("convergence") != std::string::npos);
    const auto sub = run({"couple", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--seed") != std::string::npos);
    CHECK(run({"--version"}).out == "0.1.0\n");
}

TEST_CASE("interp on the cubic demo") {
    const auto r = run({"interp", "--demo", "cubic", "--x", "1.25", "--deriv", "0"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("value").get<double>() == doctest::Approx(1.953125).epsilon(1e-12));
    CHECK(j.at("command") == "interp");
    CHECK(j.at("version") == "0.1.0");
    CHECK(j.at("config").at("demo") == "cubic");
    const auto c = json::parse(run({"interp", "--demo", "const", "--x", "0.7"}).out);
    CHECK(c.at("value").get<double>() == doctest::Approx(3.5).epsilon(1e-13));
    // Outside the interpolation domain: numeric failure, not usage.
    CHECK(run({"interp", "--demo", "cubic", "--x", "100"}).code == stein::cli::kFail);
}

TEST_CASE("convergence emits the sweep CSV") {
    const auto r = run({"convergence"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 8);
    CHECK(lines[0].rfind("# stein_prelimit", 0) == 0);
    CHECK(lines[1].rfind("# config ", 0) == 0);
    CHECK(lines[2] == "rho,delta,gap,bound_rhs,fitted_C,slope");
    const auto one = run({"convergence", "--rhos", "0.7", "--format", "json"});
    REQUIRE(one.code == 0);
    CHECK(json::parse(one.out).at("sweep").at("rows").size() == 1);
}

TEST_CASE("couple reports a z-score") {
    const auto r = run({"couple", "--k", "3", "--reps", "10000", "--seed", "7"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.at("exact").get<double>() == 4.0);
    CHECK(std::abs(j.at("z_score").get<double>()) <= 3.0);
    CHECK(j.contains("estimate"));
    CHECK(j.contains("stderr"));
}

TEST_CASE("interchange and poisson checks") {
    const auto x = run({"interchange-check", "--model", "mm1", "--x", "0.5"});
    REQUIRE(x.code == 0);
    CHECK(json::parse(x.out).at("max_abs_residual").get<double>() <= 1e-10);
    for (const char* model : {"affine", "product2d"}) CHECK(run({"interchange-check", "--model", model}).code == 0);

    const auto p = run({"poisson", "--model", "mm1", "--h", "const"});
    REQUIRE(p.code == 0);
    for (const auto& v : json::parse(p.out).at("f")) CHECK(std::abs(v.get<double>()) <= 1e-12);

    const auto kernel = temp_file("kernel.json", R"({"lattice": {"delta": 1.0, "lower": [0], "upper": [30]},
        "jumps": [{"offset": [1], "rate": {"type": "constant", "c": 1.0}},
                  {"offset": [-1], "rate": {"type": "gated", "c": 2.0, "axis": 0, "min_index": 1}}]})");
    const auto k = run({"poisson", "--kernel", kernel.string(), "--h", "dlip"});
    CHECK(k.code == 0);
    std::filesystem::remove(kernel);
}

TEST_CASE("config file fills flags and flags win") {
    const auto cfg = temp_file("config.json", R"({"demo": "square", "x": [1.5], "delta": 0.5})");
    const auto a = json::parse(run({"interp", "--config", cfg.string()}).out);
    CHECK(a.at("value").get<double>() == doctest::Approx(2.25).epsilon(1e-12));
    const auto b = json::parse(run({"interp", "--config", cfg.string(), "--demo", "linear"}).out);
    CHECK(b.at("value").get<double>() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(b.at("config").at("demo") == "linear");
    CHECK(b.at("config").at("delta") == 0.5);
    const auto bad = temp_file("bad.json", R"({"nonsense": 1})");
    CHECK(run({"interp", "--config", bad.string()}).code == stein::cli::kUsage);
    const auto seeded = temp_file("seed.json", R"({"seed": 3, "reps": 200})");
    CHECK(run({"couple", "--config", seeded.string()}).code != stein::cli::kUsage);
    for (const auto& f : {cfg, bad, seeded}) std::filesystem::remove(f);
}

TEST_CASE("identical config and seed give identical bytes") {
    const std::vector<std::string> args{"couple", "--order", "2", "--h", "dlip", "--reps", "2000", "--seed", "11"};
    const auto a = run(args);
    const auto b = run(args);
    CHECK(a.out == b.out);
    const auto m1 = run({"misalign", "--reps", "50", "--seed", "4"});
    const auto m2 = run({"misalign", "--reps", "50", "--seed", "4"});
    CHECK(m1.out == m2.out);
}

TEST_CASE("report goes to --out") {
    const auto path = std::filesystem::temp_directory_path() / "stein_cli_out.json";
    const auto r = run({"interp", "--x", "2.0", "--out", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    CHECK(json::parse(in).at("value").get<double>() == doctest::Approx(8.0));
    std::filesystem::remove(path);
}
