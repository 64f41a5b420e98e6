// Tests for the scenario layer: JSON parsing and validation, the script
// runner's outcome judging, determinism of transcripts, and the bundled
// scenario files.

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oblivion/scenario.hpp"

using namespace oblivion;

namespace {

const std::filesystem::path kScenarioDir = OBLIVION_SCENARIO_DIR;

nlohmann::json tiny_scenario() {
  return nlohmann::json::parse(R"({
    "name": "tiny",
    "backend": "clear",
    "protocol": "mssp",
    "server": {"id": "sally", "auth_seed": 1000, "seed": 2000},
    "principals": [
      {"id": "alice", "auth_seed": 11, "seed": 9100},
      {"id": "bob", "auth_seed": 22, "seed": 9200}
    ],
    "eval_seed": 500,
    "functions": [{"id": "1", "builtin": "adder", "width": 2}],
    "data": [{"label": "pair", "owner": "alice", "hex": "3", "width": 2}],
    "script": [
      {"action": "upload", "data": "pair", "expect": "stored"},
      {"action": "request", "principal": "bob", "func": "1", "data": "pair",
       "input": {"hex": "1", "width": 2}, "expect": "output", "expect_hex": "4"}
    ]
  })");
}

}  // namespace

// ---- Parsing and validation ---------------------------------------------------

TEST_CASE("a scenario parses into the expected spec") {
  ScenarioSpec spec = parse_scenario(tiny_scenario(), ".");
  CHECK(spec.name == "tiny");
  CHECK(spec.backend == BackendId::Clear);
  CHECK(spec.default_protocol == ProtocolKind::Mssp);
  CHECK(spec.server_id == "sally");
  CHECK(spec.require_signatures);
  CHECK(spec.func_id_width == 2);
  REQUIRE(spec.principals.size() == 2);
  CHECK(spec.principals[0].id == "alice");
  CHECK(spec.principals[0].shares_eval_key);
  CHECK_FALSE(spec.principals[0].administrator);
  REQUIRE(spec.functions.size() == 1);
  CHECK((spec.functions[0].id == BitVec{1, 0}));
  CHECK(spec.functions[0].builtin == "adder");
  REQUIRE(spec.data.size() == 1);
  CHECK((spec.data[0].bits == BitVec{1, 1}));
  CHECK(spec.script.size() == 2);
  CHECK(spec.find_principal("bob") != nullptr);
  CHECK(spec.find_principal("eve") == nullptr);
}

TEST_CASE("an empty scenario object still yields sane defaults") {
  ScenarioSpec spec = parse_scenario(nlohmann::json::object(), ".");
  CHECK(spec.backend == BackendId::Clear);
  CHECK(spec.server_id == "sally");
  CHECK(spec.default_protocol == ProtocolKind::Mssp);
  CHECK(spec.principals.empty());
  CHECK(spec.script.empty());
  CHECK_FALSE(spec.adversary.any());
}

TEST_CASE("structural problems are rejected before anything runs") {
  nlohmann::json dup = tiny_scenario();
  dup["principals"][1]["id"] = "alice";
  CHECK_THROWS_AS(parse_scenario(dup, "."), ScenarioError);

  nlohmann::json two_admins = tiny_scenario();
  two_admins["principals"][0]["administrator"] = true;
  two_admins["principals"][1]["administrator"] = true;
  CHECK_THROWS_AS(parse_scenario(two_admins, "."), ScenarioError);

  nlohmann::json orphan = tiny_scenario();
  orphan["data"][0]["owner"] = "eve";
  CHECK_THROWS_AS(parse_scenario(orphan, "."), ScenarioError);

  nlohmann::json bad_params = tiny_scenario();
  bad_params["params"] = "512;8;4";
  CHECK_THROWS_AS(parse_scenario(bad_params, "."), ScenarioError);

  nlohmann::json bad_cap = tiny_scenario();
  bad_cap["adversary"] = {{"capabilities", {"mind_reading"}}};
  CHECK_THROWS_AS(parse_scenario(bad_cap, "."), ScenarioError);

  nlohmann::json bad_script = tiny_scenario();
  bad_script["script"] = "do the thing";
  CHECK_THROWS_AS(parse_scenario(bad_script, "."), ScenarioError);

  // Fields with the wrong JSON type surface as scenario errors too.
  nlohmann::json bad_type = tiny_scenario();
  bad_type["principals"][0]["auth_seed"] = "eleven";
  CHECK_THROWS_AS(parse_scenario(bad_type, "."), ScenarioError);

  nlohmann::json bad_backend = tiny_scenario();
  bad_backend["backend"] = "quantum";
  CHECK_THROWS_AS(parse_scenario(bad_backend, "."), InvalidParams);
}

TEST_CASE("a file that is not JSON is reported as a scenario error") {
  std::filesystem::path bad = std::filesystem::temp_directory_path() / "oblivion-bad.json";
  {
    std::ofstream out(bad);
    out << "{ not json ";
  }
  CHECK_THROWS_AS(load_scenario(bad), ScenarioError);
  std::filesystem::remove(bad);
  CHECK_THROWS_AS(load_scenario(bad), Error);  // now missing entirely
}

// ---- Running -------------------------------------------------------------------

TEST_CASE("the tiny scenario passes and records the computed output") {
  ScenarioOutcome out = run_scenario(parse_scenario(tiny_scenario(), "."));
  CHECK(out.name == "tiny");
  CHECK(out.all_passed);
  REQUIRE(out.results.size() == 2);
  CHECK(out.results[0].outcome == "stored");
  CHECK(out.results[0].pass);
  CHECK(out.results[1].outcome == "output");
  CHECK(out.results[1].output_hex == "4");  // 3 + 1 through the width-2 adder
  CHECK(out.results[1].pass);
  CHECK(out.results[1].summary().find("PASS") != std::string::npos);
  CHECK(out.transcript.has_step("store"));
  CHECK(out.transcript.has_step("evaluate"));
}

TEST_CASE("an expectation mismatch fails the step but not the run") {
  nlohmann::json j = tiny_scenario();
  j["script"][1]["expect_hex"] = "5";  // wrong sum
  ScenarioOutcome out = run_scenario(parse_scenario(j, "."));
  CHECK_FALSE(out.all_passed);
  CHECK(out.results[0].pass);
  CHECK_FALSE(out.results[1].pass);
  CHECK(out.results[1].output_hex == "4");
  std::string summary = out.results[1].summary();
  CHECK(summary.find("FAIL") != std::string::npos);
  CHECK(summary.find("expected") != std::string::npos);

  nlohmann::json wrong_outcome = tiny_scenario();
  wrong_outcome["script"][0]["expect"] = "denied";
  ScenarioOutcome out2 = run_scenario(parse_scenario(wrong_outcome, "."));
  CHECK_FALSE(out2.all_passed);
  CHECK_FALSE(out2.results[0].pass);
}

TEST_CASE("structural script problems abort with the failing step index") {
  nlohmann::json j = tiny_scenario();
  j["script"][1]["data"] = "ghost";
  try {
    run_scenario(parse_scenario(j, "."));
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.step == 1);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }

  nlohmann::json no_expect = tiny_scenario();
  no_expect["script"][0].erase("expect");
  CHECK_THROWS_AS(run_scenario(parse_scenario(no_expect, ".")), ScenarioError);

  // Requesting data that was never uploaded is a script-order bug.
  nlohmann::json not_uploaded = tiny_scenario();
  not_uploaded["script"].erase(0);
  try {
    run_scenario(parse_scenario(not_uploaded, "."));
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.step == 0);
  }
}

TEST_CASE("scenario runs are deterministic transcript for transcript") {
  std::string first = run_scenario(parse_scenario(tiny_scenario(), ".")).transcript.to_jsonl();
  std::string second = run_scenario(parse_scenario(tiny_scenario(), ".")).transcript.to_jsonl();
  CHECK(first == second);
  CHECK_FALSE(first.empty());
}

// ---- Bundled scenarios -------------------------------------------------------------

TEST_CASE("the bundled happy-path scenarios pass end to end") {
  for (const char* name : {"basic_happy.json", "mssp_happy.json", "mcsp_happy.json"}) {
    CAPTURE(name);
    ScenarioOutcome out = run_scenario(load_scenario(kScenarioDir / name));
    REQUIRE_FALSE(out.results.empty());
    for (const ActionResult& r : out.results) {
      CAPTURE(r.summary());
      CHECK(r.pass);
    }
    CHECK(out.all_passed);
  }
}

TEST_CASE("the bundled adversary scenarios hold their claimed outcomes") {
  for (const char* name :
       {"attack_forged_request.json", "attack_stolen_auth.json", "attack_nonadmin_prb.json"}) {
    CAPTURE(name);
    ScenarioOutcome out = run_scenario(load_scenario(kScenarioDir / name));
    CHECK(out.all_passed);
  }
}
