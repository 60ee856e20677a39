#include "pargate/config.hpp"

#include "pargate/model.hpp"

#include "doctest.h"

#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

using namespace pargate;

namespace {

// Minimal valid document; tests splice mutations into it.
std::string nv_text() {
  return R"({
    "name": "t",
    "seed": 3,
    "platform": {"type": "nv_chain", "n_qubits": 2, "coupling": 0.2, "coupling_unit": "gT"},
    "targets": {"gate": "ry_pi"},
    "pulse": {"total_time": 1.0, "n_slices": 8, "amplitude_bound": 60.0, "synthesis": "geometric"},
    "optimizer": {"max_iters": 50},
    "evaluation": {"sweep": {"axis": [0.1, 0.2], "n_seeds": 2}}
  })";
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const std::size_t at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("a well formed document round-trips into a model") {
  const ExperimentConfig cfg = parse_config(nv_text());
  CHECK(cfg.name == "t");
  CHECK(cfg.seed == 3);
  CHECK(cfg.pulse.n_slices == 8);
  CHECK(cfg.optimizer.max_iters == 50);
  CHECK(!cfg.optimize);  // geometric synthesis skips the optimizer stage
  CHECK(cfg.evaluation.sweep.enabled);
  CHECK(cfg.evaluation.sweep.unit == "gT");
  CHECK(!cfg.evaluation.repeat.enabled);
  CHECK(cfg.raw == nv_text());

  const SystemModel m = build_model(cfg);
  CHECK(m.platform == Platform::nv_chain);
  REQUIRE(m.n_subsystems() == 2);
  // gT units divide by the total time.
  CHECK(m.crosstalk[0].strength == doctest::Approx(0.2).epsilon(1e-15));
  CHECK((m.subsystems[0].target - named_gate("ry_pi", 1)).norm() == 0.0);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"name\"", "\"zzz\": 1, \"name\"")),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"type\": \"nv_chain\"", "\"zzz\": 1, \"type\": \"nv_chain\"")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"total_time\"", "\"zzz\": 1, \"total_time\"")),
      ConfigError);
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"max_iters\"", "\"zzz\": 1, \"max_iters\"")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"sweep\"", "\"zzz\": 1, \"sweep\"")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"axis\"", "\"zzz\": 1, \"axis\"")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"gate\"", "\"zzz\": 1, \"gate\"")),
                  ConfigError);
}

TEST_CASE("malformed documents fail with config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(replaced(nv_text(), "\"n_slices\": 8", "\"n_slices\": 0")),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"total_time\": 1.0", "\"total_time\": -2.0")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"synthesis\": \"geometric\"", "\"synthesis\": \"magic\"")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"coupling_unit\": \"gT\"", "\"coupling_unit\": \"scale\"")),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nv_text(), "\"axis\": [0.1, 0.2]", "\"axis\": []")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("coupling units convert as documented") {
  CHECK(coupling_to_rad_s(0.3, "gT", 2.0) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(coupling_to_rad_s(5.0, "hz", 1.0) ==
        doctest::Approx(2.0 * std::numbers::pi * 5.0).epsilon(1e-15));
  CHECK(coupling_to_rad_s(7.0, "rad_per_s", 1.0) == 7.0);
  CHECK_THROWS_AS(coupling_to_rad_s(1.0, "scale", 1.0), ConfigError);
  CHECK_THROWS_AS(coupling_to_rad_s(1.0, "gT", 0.0), ConfigError);
}

TEST_CASE("targets broadcast or match the subsystem count") {
  const std::string nmr = R"({
    "name": "t2",
    "platform": {
      "type": "nmr",
      "spins": [{"label": "a", "omega_hz": 100.0}, {"label": "b", "omega_hz": -50.0},
                {"label": "c", "omega_hz": 75.0}, {"label": "d", "omega_hz": 25.0}],
      "j_couplings_hz": [[0, 1, 40.0], [2, 3, 55.0], [1, 2, 3.0]],
      "partition": [[0, 1], [2, 3]]
    },
    "targets": {"gates": ["cnot", "cz"]},
    "pulse": {"total_time": 0.01, "n_slices": 16, "amplitude_bound": 1000.0, "synthesis": "grape"}
  })";
  const ExperimentConfig cfg = parse_config(nmr);
  CHECK(cfg.optimize);
  const SystemModel m = build_model(cfg);
  REQUIRE(m.n_subsystems() == 2);
  CHECK((m.subsystems[0].target - named_gate("cnot", 2)).norm() == 0.0);
  CHECK((m.subsystems[1].target - named_gate("cz", 2)).norm() == 0.0);

  const ExperimentConfig bad = parse_config(
      replaced(nmr, R"("gates": ["cnot", "cz"])", R"("gates": ["cnot", "cz", "cz"])"));
  CHECK_THROWS_AS(build_model(bad), ConfigError);
  CHECK_THROWS_AS(
      parse_config(replaced(nmr, R"("gates": ["cnot", "cz"])",
                            R"("gate": "cz", "gates": ["cnot", "cz"])")),
      ConfigError);
}

TEST_CASE("repeat protocol accepts either explicit points or a range") {
  const std::string base = replaced(
      nv_text(), R"("sweep": {"axis": [0.1, 0.2], "n_seeds": 2})", R"("repeat": {"m_max": 4})");
  const ExperimentConfig cfg = parse_config(base);
  CHECK(cfg.evaluation.repeat.enabled);
  CHECK(cfg.evaluation.repeat.m_values == std::vector<int>{1, 2, 3, 4});
  CHECK(!cfg.evaluation.repeat.has_at);

  const ExperimentConfig pts = parse_config(
      replaced(base, R"({"m_max": 4})", R"({"m_values": [1, 5, 9], "at": 0.25})"));
  CHECK(pts.evaluation.repeat.m_values == std::vector<int>{1, 5, 9});
  CHECK(pts.evaluation.repeat.has_at);
  CHECK(pts.evaluation.repeat.at == 0.25);

  CHECK_THROWS_AS(
      parse_config(replaced(base, R"({"m_max": 4})", R"({"m_max": 4, "m_values": [1]})")),
      ConfigError);
}

TEST_CASE("custom platforms define their operators inline") {
  const std::string custom = R"({
    "name": "t3",
    "platform": {
      "type": "custom",
      "subsystems": [{
        "qubit_labels": ["q0"],
        "drift": [[0.0, 0.0], [0.0, 1.5]],
        "target": [[0.0, 1.0], [1.0, 0.0]],
        "channels": [{"label": "x", "bound": 10.0,
                      "generator": [[0.0, 0.5], [0.5, 0.0]]}]
      }]
    },
    "pulse": {"total_time": 1.0, "n_slices": 4, "amplitude_bound": 10.0, "synthesis": "grape"}
  })";
  const SystemModel m = build_model(parse_config(custom));
  REQUIRE(m.n_subsystems() == 1);
  CHECK(m.subsystems[0].dim == 2);
  CHECK(m.subsystems[0].channels[0].amplitude_bound == 10.0);

  // Named gates would fight the inline targets, so the combination is refused.
  CHECK_THROWS_AS(
      parse_config(replaced(custom, "\"pulse\"", "\"targets\": {\"gate\": \"ry_pi\"}, \"pulse\"")),
      ConfigError);
}

TEST_CASE("bundled configuration files parse and build") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(PARGATE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig cfg = load_config(entry.path().string());
    CHECK(!cfg.name.empty());
    const SystemModel m = build_model(cfg);
    CHECK(m.n_subsystems() >= 1);
    ++n;
  }
  CHECK(n >= 2);
}
