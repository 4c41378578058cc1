#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "support.hpp"

using namespace stripwave;
using namespace sw_test;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("stripwave_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("minimal config gets defaults", "[config]") {
  const RunConfig cfg = parse_config(R"({
    "potential": "scalar_quartic",
    "grid": {"h": 0.0625, "T": 6.0},
    "constraint": {"N": 2}
  })");
  REQUIRE(cfg.family == "scalar_quartic");
  REQUIRE(cfg.h == Approx(0.0625));
  REQUIRE(cfg.T == Approx(6.0));
  REQUIRE(cfg.N == 2);
  REQUIRE(cfg.tol == Approx(1e-6));
  REQUIRE(cfg.max_iter == 20000);
  REQUIRE(cfg.seed == 0);
  REQUIRE(cfg.threads == 1);
  REQUIRE(cfg.strip.kind == StripSpec::Kind::flat);
  REQUIRE(cfg.strip.L == Approx(1.0));
}

TEST_CASE("cross-field rules are reported by name", "[config]") {
  SECTION("slabs must fit: NL+4L <= T") {
    REQUIRE_THROWS_WITH(
        parse_config(R"({"grid": {"h": 0.0625, "T": 2.0}, "constraint": {"N": 2}})"),
        Catch::Matchers::ContainsSubstring("NL+4L <= T"));
  }
  SECTION("malformed JSON") {
    REQUIRE_THROWS_AS(parse_config("{not json"), ConfigError);
  }
  SECTION("bad field types carry the field name") {
    REQUIRE_THROWS_WITH(parse_config(R"({"grid": {"h": "tiny", "T": 6.0}})"),
                        Catch::Matchers::ContainsSubstring("h"));
  }
  SECTION("unknown potential family") {
    REQUIRE_THROWS_AS(parse_config(R"({"potential": {"family": "triple_well"}})"), ConfigError);
  }
  SECTION("cutoff radius must satisfy 2r <= r0") {
    REQUIRE_THROWS_WITH(
        parse_config(R"({"grid": {"h": 0.0625, "T": 6.0}, "cutoff": {"r": 0.3}})",
                     Subcommand::cutoff_test),
        Catch::Matchers::ContainsSubstring("2r <= r0"));
  }
}

TEST_CASE("h that does not divide L is snapped with a warning", "[config]") {
  const RunConfig cfg = parse_config(R"({"grid": {"h": 0.061, "T": 6.0}})");
  const DiscreteDomain D = build_mask(cfg.strip, cfg.h, cfg.T);
  REQUIRE(D.h == Approx(1.0 / 16));
  REQUIRE_FALSE(D.warnings.empty());
}

TEST_CASE("config echo round-trips to the same effective config", "[config][echo]") {
  const std::string text = R"({
    "potential": {"family": "product_well", "m": 2, "r0": 0.3},
    "strip": {"kind": "sinusoidal", "L": 1.0, "amplitude": 0.15, "phase": 0.5},
    "grid": {"h": 0.03125, "T": 7.0},
    "constraint": {"N": 3},
    "opts": {"tol": 1e-7, "max_iter": 12345, "seed": 99},
    "threads": 2,
    "output_dir": "somewhere"
  })";
  const RunConfig cfg = parse_config(text);
  const json echo = effective_json(cfg);
  const RunConfig cfg2 = parse_config(echo.dump());
  REQUIRE(effective_json(cfg2) == echo);

  const std::string table_text = R"({
    "strip": {"kind": "table", "L": 1.0,
              "table": [[0.0, 0.0, 1.0], [0.5, 0.0, 1.25]]},
    "grid": {"h": 0.0625, "T": 6.0}
  })";
  const RunConfig tc = parse_config(table_text);
  const json techo = effective_json(tc);
  REQUIRE(effective_json(parse_config(techo.dump())) == techo);
}

TEST_CASE("field CSV round-trip", "[io][csv]") {
  const DiscreteDomain D = build_mask(sinusoidal_strip(), 1.0 / 16, 2.0);
  Rng rng(61);
  const Field u = random_field(D, 2, rng, -1.0, 1.0);
  const fs::path dir = temp_dir("csv");
  write_field_csv(dir / "u.csv", u);
  const Field v = read_field_csv(dir / "u.csv", D, 2);
  REQUIRE(v.data == u.data);  // 17 significant digits round-trip doubles
}

TEST_CASE("solve artifacts are emitted and reproducible", "[io][determinism]") {
  SolveConfig sc;
  sc.P = scalar_quartic();
  sc.strip = flat_strip();
  sc.h = 1.0 / 16;
  sc.T = 6.0;
  sc.N = 2;
  sc.opts.tol = 1e-6;
  sc.opts.max_iter = 10000;
  const DiscreteDomain D = build_mask(sc.strip, sc.h, sc.T);

  auto emit = [&](const fs::path& dir) {
    auto [u, rep] = solve_standing_wave(sc, D);
    write_field_csv(dir / "solution.csv", u);
    write_trace_csv(dir / "energy_trace.csv", rep.min_report.trace);
    write_json_file(dir / "report.json", to_json(rep));
  };
  const fs::path d1 = temp_dir("emit1"), d2 = temp_dir("emit2");
  emit(d1);
  emit(d2);
  for (const char* name : {"solution.csv", "energy_trace.csv", "report.json"}) {
    REQUIRE(fs::exists(d1 / name));
    REQUIRE(read_text(d1 / name) == read_text(d2 / name));
  }
}

TEST_CASE("mask CSV dump has one row per grid row", "[io]") {
  const DiscreteDomain D = build_mask(flat_strip(), 1.0 / 16, 2.0);
  const fs::path dir = temp_dir("mask");
  write_mask_csv(dir / "mask.csv", D);
  const std::string text = read_text(dir / "mask.csv");
  const auto rows = std::count(text.begin(), text.end(), '\n');
  REQUIRE(rows == D.n_rows);
  REQUIRE(std::count(text.begin(), text.end(), '1') == static_cast<long>(D.n_cells()));
}
