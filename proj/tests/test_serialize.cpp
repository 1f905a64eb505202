#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "difflab/serialize.hpp"

#include "oracle_helpers.hpp"

using namespace difflab;
using nlohmann::json;

TEST_CASE("reference config round-trips through the parser") {
  const json ref = reference_config();
  const ExperimentConfig config = parse_config(ref);
  CHECK(resolved_config(config) == ref);
  CHECK(config.schedule.family == Family::VpLinear);
  CHECK(config.data.d == 8);
  CHECK(config.sampler.K == 1000);
}

TEST_CASE("schema errors carry the offending field path") {
  json ref = reference_config();

  json missing = ref;
  missing["sampler"].erase("K");
  try {
    (void)parse_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path == "sampler.K");
  }

  json wrong_type = ref;
  wrong_type["data"]["sigma0_sq"] = "big";
  try {
    (void)parse_config(wrong_type);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path == "data.sigma0_sq");
  }

  json bad_family = ref;
  bad_family["schedule"]["family"] = "vp_cosine";
  try {
    (void)parse_config(bad_family);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field_path == "schedule.family");
  }

  json negative = ref;
  negative["schedule"]["beta_min"] = -1.0;
  CHECK_THROWS_AS((void)parse_config(negative), ConfigError);
}

TEST_CASE("csv numbers round-trip doubles exactly") {
  oracle::TestUniform u(41);
  for (int i = 0; i < 200; ++i) {
    const double v = u.next(-1e6, 1e6) * std::pow(10.0, u.next(-12.0, 12.0));
    const std::string s = csv_number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(csv_number(0.5) == "0.5");
}

TEST_CASE("trace CSV embeds version and config") {
  VarianceTrace trace;
  trace.sigma_hat_sq = {1.0, 1.25};
  trace.alpha_integrals = {0.5};
  trace.g2_integrals = {0.75};
  const std::string csv = trace_to_csv(trace, json{{"k", "v"}});
  CHECK(csv.find("# format_version,1") == 0);
  CHECK(csv.find("# config,{\"k\":\"v\"}") != std::string::npos);
  CHECK(csv.find("k,sigma_hat_sq,alpha_int,g2_int") != std::string::npos);
  CHECK(csv.find("\n1,1.25,0.5,0.75\n") != std::string::npos);
}

TEST_CASE("bound constants default from the gaussian model") {
  const ExperimentConfig config = parse_config(reference_config());
  const BoundContext ctx = bound_context_from(config);
  CHECK(ctx.m0 == doctest::Approx(1.0 / 0.64).epsilon(1e-14));
  CHECK(ctx.L0 == doctest::Approx(1.0 / 0.64).epsilon(1e-14));
  CHECK(ctx.x0_l2 == doctest::Approx(std::sqrt(8.0 * 0.64)).epsilon(1e-14));
  CHECK_FALSE(ctx.x0_l2_is_bound);

  // an explicit m0 (with no explicit |x0|) switches to the generic upper bound
  json j = reference_config();
  j["bound_constants"]["m0"] = 1.2;
  j["bound_constants"]["L0"] = 1.3;
  j["bound_constants"].erase("x0_l2");
  const BoundContext generic = bound_context_from(parse_config(j));
  CHECK(generic.m0 == 1.2);
  CHECK(generic.x0_l2_is_bound);
  CHECK(generic.x0_l2 == doctest::Approx(x0_l2_default(1.2, 8, 0.0)).epsilon(1e-14));
}

TEST_CASE("terminal state file layout") {
  const std::string path = "/tmp/difflab_test_states.bin";
  std::vector<double> states{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  write_states_file(path, 3, 2, states, json{{"n", 1}});

  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  char magic[8];
  in.read(magic, 8);
  CHECK(std::memcmp(magic, "DLSTATES", 8) == 0);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  CHECK(version == 1);
  std::uint64_t d = 0, chains = 0, cfg_len = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  in.read(reinterpret_cast<char*>(&chains), sizeof chains);
  in.read(reinterpret_cast<char*>(&cfg_len), sizeof cfg_len);
  CHECK(d == 3);
  CHECK(chains == 2);
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), static_cast<std::streamsize>(cfg_len));
  CHECK(json::parse(cfg) == json{{"n", 1}});
  std::vector<double> payload(6);
  in.read(reinterpret_cast<char*>(payload.data()), 6 * sizeof(double));
  CHECK(payload == states);
  std::remove(path.c_str());
}
