#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "silfid/io.hpp"
#include "stub_chat_server.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = SILFID_TEST_TMP;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  fs::create_directories(kTmp);
  const auto out = kTmp / "stdout.txt";
  const auto err = kTmp / "stderr.txt";
  const std::string cmd = std::string("\"") + SILFID_CLI_PATH + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  Run r;
  const int status = std::system(cmd.c_str());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = silfid::io::read_text(out);
  r.err = silfid::io::read_text(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void write(const fs::path& p, const std::string& text) { silfid::io::write_text(p, text); }

const char* kCatalog =
    R"({"question_id":"mind","stem":"Mind","options":["physicalism","non-physicalism"],"target_option":"physicalism","is_binary":true,"complement_option":"non-physicalism","domain":"Philosophy of Mind"}
{"question_id":"ethics","stem":"Ethics","options":["deon","cons","virtue"],"target_option":"deon","is_binary":false,"domain":"Ethics & Moral Phil."}
)";

const char* kProfiles =
    R"({"respondent_id":"r1","aos":["Metaphysics"],"aoi":["Logic"],"institution":"Uni A","country":"UK"}
{"respondent_id":"r2","aos":["Ethics"],"aoi":["Logic"],"institution":"Uni B","country":"US"}
)";

const char* kResponses =
    R"({"respondent_id":"r1","question_id":"mind","selected":[{"stance":"Accept","option":"physicalism"}]}
{"respondent_id":"r2","question_id":"mind","selected":[{"stance":"Lean towards","option":"non-physicalism"}]}
{"respondent_id":"r1","question_id":"ethics","selected":[{"stance":"Accept","option":"virtue"}]}
{"respondent_id":"r2","question_id":"ethics","selected":[{"stance":"Reject","option":"virtue"},{"stance":"Accept","option":"cons"}]}
)";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("--version").out.find("0.1.0") != std::string::npos);
  CHECK(run("analyze").code != 0);
  CHECK(run("nonsense-command").code != 0);
}

TEST_CASE("synth output analysed twice gives byte-identical reports") {
  const auto dir = kTmp / "synth";
  fs::remove_all(dir);
  write(kTmp / "synth.json", R"({"respondents": 300, "questions": 12, "factors": 3, "missing_rate": 0.2,
    "seed": 4, "features": [{"name": "F", "prevalence": 0.2, "independent_of": "Q001"}],
    "collapse": {"shrink": 2, "seed": 1, "rules": [{"feature": "F", "question": "Q001"}]}})");
  const auto s = run("synth --config " + q(kTmp / "synth.json") + " -o " + q(dir));
  REQUIRE_MESSAGE(s.code == 0, s.err);
  for (const char* f : {"human.panel", "truth.json", "features.csv", "collapsed.panel"}) {
    CHECK(fs::exists(dir / f));
  }
  const std::string base = "analyze --human " + q(dir / "human.panel") + " --model " +
                           q(dir / "collapsed.panel") + " --features " + q(dir / "features.csv") +
                           " --perm 49 --seed 3";
  const auto a = run(base);
  const auto b = run(base);
  REQUIRE_MESSAGE(a.code == 0, a.err);
  CHECK(a.out == b.out);
  CHECK(a.out.find("[effects]") != std::string::npos);
  CHECK(a.out.find("mantel_permutations = 49") != std::string::npos);

  const auto c = run(base + " -o " + q(dir / "report"));
  REQUIRE(c.code == 0);
  CHECK(silfid::io::read_text(dir / "report" / "report.txt") == a.out);

  // Self comparison through the CLI.
  const auto self = run("analyze --human " + q(dir / "human.panel") + " --model " +
                        q(dir / "human.panel") + " --perm 9");
  CHECK(self.code != 0);  // duplicate source tag
  CHECK(self.err.find("duplicate") != std::string::npos);
}

TEST_CASE("ingest, heatmap, pca, report and dpo-export chain") {
  const auto dir = kTmp / "chain";
  fs::remove_all(dir);
  write(dir / "catalog.jsonl", kCatalog);
  write(dir / "profiles.jsonl", kProfiles);
  write(dir / "responses.jsonl", kResponses);

  const auto ing = run("ingest --catalog " + q(dir / "catalog.jsonl") + " --responses " +
                       q(dir / "responses.jsonl") + " --profiles " + q(dir / "profiles.jsonl") +
                       " --plan-out " + q(dir / "plan.json") + " --tag human -o " + q(dir / "h.panel"));
  REQUIRE_MESSAGE(ing.code == 0, ing.err);
  const auto panel = silfid::io::read_panel(dir / "h.panel");
  CHECK(panel.rows() == 2);
  CHECK(panel.at(0, 0) == 1.0);
  CHECK(panel.at(1, 0) == 0.25);
  CHECK(fs::exists(dir / "plan.json"));

  const auto hm = run("heatmap --panel " + q(dir / "h.panel") + " --cell 4 -o " + q(dir / "h.svg"));
  REQUIRE(hm.code == 0);
  const auto svg = silfid::io::read_text(dir / "h.svg");
  CHECK(svg.find("data-rows=\"2\" data-cols=\"2\"") != std::string::npos);

  const auto rep = run("report --panel " + q(dir / "h.panel"));
  REQUIRE(rep.code == 0);
  CHECK(rep.out.find("[panels]") != std::string::npos);

  const auto dpo = run("dpo-export --responses " + q(dir / "responses.jsonl") + " --profiles " +
                       q(dir / "profiles.jsonl") + " --catalog " + q(dir / "catalog.jsonl") +
                       " --rejected-mode complement_option -o " + q(dir / "dpo"));
  REQUIRE_MESSAGE(dpo.code == 0, dpo.err);
  std::size_t lines = 0;
  for (const auto& entry : fs::directory_iterator(dir / "dpo")) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    for (std::string l; std::getline(in, l);) ++lines;
  }
  CHECK(lines == 8);  // 4 preference pairs + 4 supervised rows

  const auto bad = run("ingest --catalog " + q(dir / "catalog.jsonl") + " --responses " +
                       q(dir / "catalog.jsonl") + " -o " + q(dir / "x.panel"));
  CHECK(bad.code == 1);
}

TEST_CASE("pca and effects subcommands write their tables") {
  const auto dir = kTmp / "pca";
  fs::remove_all(dir);
  write(kTmp / "pca.json", R"({"respondents": 200, "questions": 10, "factors": 2, "missing_rate": 0.1, "seed": 1})");
  REQUIRE(run("synth --config " + q(kTmp / "pca.json") + " -o " + q(dir)).code == 0);
  const auto p = run("pca --panel " + q(dir / "human.panel") + " --ncp 2 --align-with " +
                     q(dir / "human.panel") + " -k 2 -o " + q(dir / "out"));
  REQUIRE_MESSAGE(p.code == 0, p.err);
  for (const char* f : {"loadings.csv", "ratios.csv", "pca.txt", "alignment.csv"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  write(dir / "f.csv", [&] {
    const auto m = silfid::io::read_panel(dir / "human.panel");
    std::string s = "respondent_id,G\n";
    for (std::size_t r = 0; r < m.rows(); ++r) s += m.respondent_ids()[r] + (r % 2 ? ",1\n" : ",0\n");
    return s;
  }());
  const auto e = run("effects --panel " + q(dir / "human.panel") + " --features " + q(dir / "f.csv") +
                     " -o " + q(dir / "eff"));
  REQUIRE_MESSAGE(e.code == 0, e.err);
  CHECK(fs::exists(dir / "eff"));
}

TEST_CASE("sample subcommand against a local endpoint") {
  const auto dir = kTmp / "sample";
  fs::remove_all(dir);
  write(dir / "catalog.jsonl", kCatalog);
  write(dir / "profiles.jsonl", kProfiles);
  silfid::testing::StubChatServer server([](const std::string& system, const std::string& user, int&) {
    const bool a = silfid::testing::persona_institution(system) == "Uni A";
    if (silfid::testing::prompt_question(user) == "Mind") {
      return std::string(a ? R"(["Accept: physicalism"])" : R"(["Reject: physicalism"])");
    }
    return std::string(a ? R"(["Lean towards: deon"])" : "I hold a combination of views.");
  });
  const auto s = run("sample --profiles " + q(dir / "profiles.jsonl") + " --catalog " +
                     q(dir / "catalog.jsonl") + " --endpoint " + server.endpoint() +
                     " --model stub --parallel 2 --retries 0 -o " + q(dir / "raw.jsonl"));
  REQUIRE_MESSAGE(s.code == 0, s.err);
  CHECK(server.requests() == 4);
  std::ifstream in(dir / "raw.jsonl");
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  CHECK(n == 3);
  const auto stats = nlohmann::json::parse(silfid::io::read_text(dir / "raw.jsonl.stats.json"));
  CHECK(stats["overall"]["counts"]["combination_of_views"] == 1);
}
