// silfid command-line front end.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "silfid/effects.hpp"
#include "silfid/error.hpp"
#include "silfid/finetune.hpp"
#include "silfid/heatmap.hpp"
#include "silfid/ingest.hpp"
#include "silfid/io.hpp"
#include "silfid/pca.hpp"
#include "silfid/report.hpp"
#include "silfid/sampler.hpp"
#include "silfid/synth.hpp"

namespace fs = std::filesystem;
using namespace silfid;

namespace {

constexpr const char* kFormats = R"(File formats
  profiles.jsonl   one JSON object per line:
                   {"respondent_id","aos":[..],"aoi":[..],"phd_country","phd_year",
                    "institution","country","phd_institution"}
  responses.jsonl  {"respondent_id","question_id","selected":[{"stance","option"},..]}
                   stance is one of Accept, Lean toward, Agnostic, Lean against, Reject
  catalog.jsonl    {"question_id","stem","options":[..],"target_option","is_binary",
                    "complement_option","domain"}; a missing domain is filled from the
                   bundled 14-domain table
  plan.json        normalization plan written by `ingest --plan-out`
  *.panel          first line {"format":"silfid-panel","version":1,"source_tag",
                   "respondent_ids":[..],"question_ids":[..]}, then one line per
                   respondent of space-separated values in [0,1], NA for missing
  features.csv     respondent_id,<feature>,.. with 0/1 indicators
  synth config     JSON: respondents, questions, factors, noise_sd, missing_rate, seed,
                   thresholds[4], loadings ("block" | rows), features[{name,prevalence,
                   independent_of}], collapse{shrink,seed,rules[{feature,question,level,
                   probability}]}
Environment
  SILFID_API_KEY   bearer token for `sample` (name configurable with --token-env)
)";

std::vector<ResponseMatrix> read_panels(const std::vector<std::string>& paths) {
  std::vector<ResponseMatrix> out;
  for (const auto& p : paths) out.push_back(io::read_panel(fs::path(p)));
  return out;
}

std::optional<FeatureMatrix> load_features(const std::string& features_path,
                                           const std::string& profiles_path,
                                           const ResponseMatrix& panel) {
  if (!features_path.empty()) return io::read_features_csv(io::read_text(features_path));
  if (!profiles_path.empty()) {
    return build_features(io::read_profiles(fs::path(profiles_path)), panel.respondent_ids());
  }
  return std::nullopt;
}

stats::VarianceConvention parse_convention(const std::string& s) {
  if (s == "population") return stats::VarianceConvention::population;
  if (s == "sample") return stats::VarianceConvention::sample;
  throw InputError("unknown variance convention: " + s);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    io::write_text(out_path, text);
  }
}

struct IngestArgs {
  std::string catalog, responses, profiles, plan_in, plan_out, tag = "human", out, log_out;
  std::string rule = "endorsement";
};

void run_ingest(const IngestArgs& a) {
  const auto catalog = io::read_catalog(fs::path(a.catalog));
  const auto raw = io::read_raw_responses(fs::path(a.responses));
  const auto plan = a.plan_in.empty()
                        ? build_normalization_plan(catalog, raw, popularity_rule_from_string(a.rule))
                        : io::plan_from_json(io::read_text(a.plan_in));
  std::vector<std::string> order;
  if (!a.profiles.empty()) {
    for (const auto& p : io::read_profiles(fs::path(a.profiles))) order.push_back(p.respondent_id);
  }
  const auto panel = normalize_panel(raw, plan, catalog, a.tag, order.empty() ? nullptr : &order);
  io::write_panel(fs::path(a.out), panel.matrix);
  if (!a.plan_out.empty()) io::write_text(a.plan_out, io::plan_to_json(plan));
  std::size_t flagged = 0;
  for (const auto& e : plan.entries) flagged += e.flagged ? 1 : 0;
  if (!a.log_out.empty()) {
    std::string log = "respondent_id,question_id,reason\n";
    for (const auto& d : panel.log.contradictions) {
      log += fmt::format("{},{},{}\n", d.respondent_id, d.question_id, d.reason);
    }
    io::write_text(a.log_out, log);
  }
  std::cerr << fmt::format(
      "ingest: {} respondents x {} questions, {} responses; {} contradictions dropped, "
      "{} unknown-question records, {} unknown-option selections, {} flagged plan entries\n",
      panel.matrix.rows(), panel.matrix.cols(), panel.matrix.observed_count(),
      panel.log.contradictions.size(), panel.log.unknown_question_records,
      panel.log.unknown_option_selections, flagged);
}

struct SampleArgs {
  std::string profiles, catalog, out, stats_out, checkpoint, variant = "baseline";
  SamplerConfig cfg;
  int backoff_ms = 500;
  int timeout_s = 120;
};

void run_sample(SampleArgs a) {
  a.cfg.variant = prompt_variant_from_string(a.variant);
  a.cfg.backoff = std::chrono::milliseconds(a.backoff_ms);
  a.cfg.timeout = std::chrono::seconds(a.timeout_s);
  if (a.checkpoint.empty()) a.checkpoint = a.out + ".checkpoint";
  a.cfg.checkpoint = a.checkpoint;
  const auto profiles = io::read_profiles(fs::path(a.profiles));
  const auto catalog = io::read_catalog(fs::path(a.catalog));
  auto write = [&](const SurveyResult& r) {
    std::ostringstream os;
    io::write_raw_responses(os, r.responses);
    io::write_text(a.out, os.str());
    io::write_text(a.stats_out.empty() ? a.out + ".stats.json" : a.stats_out, parse_stats_to_json(r));
  };
  try {
    const auto result = run_survey(profiles, catalog, a.cfg);
    write(result);
    const auto all = result.overall();
    std::cerr << fmt::format("sample: {} cells ({} resumed), parse success {:.1f}%\n", result.attempted,
                             result.resumed, 100.0 * all.success_rate());
  } catch (const SamplerAborted& e) {
    write(e.partial());
    throw;
  }
}

struct AnalyzeArgs {
  std::string human, out, catalog, profiles, features, rv_mode = "data", variance = "population";
  std::string gate = "chi2";
  std::vector<std::string> models;
  std::uint64_t seed = 0;
  std::size_t n_perm = kDefaultPermutations, min_overlap = kDefaultMinOverlap, ncp = 5;
  double alpha = 0.05;
};

void run_analyze(const AnalyzeArgs& a) {
  AnalyzeInputs in;
  in.human = io::read_panel(fs::path(a.human));
  in.models = read_panels(a.models);
  AnalyzeOptions o;
  o.seed = a.seed;
  o.n_perm = a.n_perm;
  o.min_overlap = a.min_overlap;
  o.rv_mode = rv_mode_from_string(a.rv_mode);
  o.convention = parse_convention(a.variance);
  o.imputation.ncp = a.ncp;
  o.classify.gate = gate_test_from_string(a.gate);
  o.classify.alpha = a.alpha;
  std::optional<QuestionCatalog> catalog;
  if (!a.catalog.empty()) {
    catalog = io::read_catalog(fs::path(a.catalog));
    o.catalog = &*catalog;
  }
  const auto features = load_features(a.features, a.profiles, in.human);
  if (features) o.features = &*features;
  const auto report = analyze(in, o);
  if (a.out.empty()) {
    std::cout << render_report(report);
  } else {
    write_report(a.out, report);
    std::cerr << "analyze: wrote " << (fs::path(a.out) / "report.txt").string() << "\n";
  }
}

struct EffectsArgs {
  std::string panel, profiles, features, out, gate = "chi2";
  std::vector<std::string> models;
  double alpha = 0.05;
  std::size_t min_valid = kMinValidResponses;
};

void run_effects(const EffectsArgs& a) {
  const auto gt = io::read_panel(fs::path(a.panel));
  const auto features = load_features(a.features, a.profiles, gt);
  if (!features) throw InputError("effects: --profiles or --features is required");
  const auto gt_scan = effect_scan(gt, *features, a.min_valid);
  io::write_text(fs::path(a.out) / "effects_ground_truth.csv", effects_csv(gt_scan.tests));
  std::vector<NamedEffects> model_tests;
  for (const auto& m : read_panels(a.models)) {
    auto scan = effect_scan(m, *features, a.min_valid);
    io::write_text(fs::path(a.out) / ("effects_" + m.source_tag() + ".csv"), effects_csv(scan.tests));
    model_tests.emplace_back(m.source_tag(), std::move(scan.tests));
  }
  ClassifyOptions co;
  co.alpha = a.alpha;
  co.gate = gate_test_from_string(a.gate);
  const auto verdicts = classify_spurious(gt_scan.tests, model_tests, co);
  if (!model_tests.empty()) io::write_text(fs::path(a.out) / "verdicts.csv", verdicts_csv(verdicts));
  std::size_t spurious = 0;
  for (const auto& v : verdicts) spurious += v.classification == EffectClass::spurious ? 1 : 0;
  std::cerr << fmt::format("effects: {} ground-truth tests ({} ineligible pairs), {} verdicts, {} spurious\n",
                           gt_scan.tests.size(), gt_scan.ineligible_pairs, verdicts.size(), spurious);
}

struct PcaArgs {
  std::string panel, align_with, out, imputed_out;
  std::size_t ncp = 5, components = 6, k = 6;
  double threshold = kSignificantComponentShare;
};

void run_pca(const PcaArgs& a) {
  ImputationConfig cfg;
  cfg.ncp = a.ncp;
  auto fit = [&](const ResponseMatrix& m) {
    const auto imputed = iterative_impute(m, cfg);
    if (!imputed.converged) {
      std::cerr << fmt::format("pca: warning: {} did not converge in {} iterations (rms delta {:.3g})\n",
                               m.source_tag(), imputed.iterations, imputed.final_rms_delta);
    }
    return std::pair{imputed, fit_pca(imputed)};
  };
  const auto panel = io::read_panel(fs::path(a.panel));
  const auto [imputed, model] = fit(panel);
  for (const auto& w : model.warnings) std::cerr << "pca: warning: " << w << "\n";
  const fs::path out(a.out);
  io::write_text(out / "loadings.csv", loadings_csv(model, a.components));
  io::write_text(out / "ratios.csv", ratios_csv(model));
  if (!a.imputed_out.empty()) {
    std::vector<double> values;
    for (Eigen::Index r = 0; r < imputed.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < imputed.values.cols(); ++c) {
        values.push_back(std::clamp(imputed.values(r, c), 0.0, 1.0));
      }
    }
    io::write_panel(fs::path(a.imputed_out),
                    ResponseMatrix(imputed.respondent_ids, imputed.question_ids, std::move(values),
                                   std::vector<std::uint8_t>(imputed.respondent_ids.size() *
                                                             imputed.question_ids.size()),
                                   panel.source_tag() + "-imputed"));
  }
  std::string summary = fmt::format("source = {}\nsignificant_components = {}\ntop6_ratio = {:.6f}\n"
                                    "iterations = {}\nconverged = {}\n",
                                    panel.source_tag(), count_significant(model, a.threshold),
                                    model.cumulative_ratio(6), imputed.iterations,
                                    imputed.converged ? "yes" : "no");
  if (!a.align_with.empty()) {
    const auto other = io::read_panel(fs::path(a.align_with));
    const auto other_model = fit(other).second;
    const auto al = align_components(model, other_model, a.k);
    summary += fmt::format("aligned_with = {}\nload_r = {:.6f}\nload_r_raw = {:.6f}\ntop5_overlap = {:.6f}\n",
                           other.source_tag(), al.flattened_r, al.flattened_r_raw, al.mean_top5_overlap);
    std::string pairs = "a_component,b_component,r,sign,top5_overlap\n";
    for (const auto& p : al.pairs) {
      pairs += fmt::format("PC{},PC{},{:.6f},{},{:.2f}\n", p.a_component + 1, p.b_component + 1, p.r,
                           p.sign, p.top5_overlap);
    }
    io::write_text(out / "alignment.csv", pairs);
  }
  io::write_text(out / "pca.txt", summary);
  std::cout << summary;
}

struct DpoArgs {
  std::string responses, profiles, catalog, out, variant = "baseline", mode = "same_option";
};

void run_dpo_export(const DpoArgs& a) {
  PreferenceOptions o;
  o.variant = prompt_variant_from_string(a.variant);
  o.mode = rejected_mode_from_string(a.mode);
  const auto set = build_preference_pairs(io::read_raw_responses(fs::path(a.responses)),
                                          io::read_profiles(fs::path(a.profiles)),
                                          io::read_catalog(fs::path(a.catalog)), o);
  const fs::path out(a.out);
  io::write_text(out / "preferences.jsonl", preference_jsonl(set));
  io::write_text(out / "supervised.jsonl", supervised_jsonl(set));
  io::write_text(out / "manifest.json", preference_manifest_json(set));
  std::cerr << fmt::format("dpo-export: {} pairs ({} agnostic, {} without profile skipped)\n",
                           set.pairs.size(), set.skipped_agnostic, set.skipped_no_profile);
}

struct SynthArgs {
  std::string config, out;
};

void run_synth(const SynthArgs& a) {
  const auto cfg = parse_synth_config(io::read_text(a.config));
  const auto panel = generate_panel(cfg.spec, "synth");
  const fs::path out(a.out);
  io::write_panel(out / "human.panel", panel.matrix);
  io::write_text(out / "truth.json", ground_truth_json(cfg, panel));
  std::optional<FeatureMatrix> features;
  if (!cfg.features.empty()) {
    std::vector<FeatureMatrix> parts;
    for (std::size_t i = 0; i < cfg.features.size(); ++i) {
      const auto& f = cfg.features[i];
      const auto seed = cfg.spec.seed ^ (0x5eedULL + i);
      parts.push_back(f.independent_of
                          ? plant_null_feature(panel.matrix, *f.independent_of, f.name, f.prevalence, seed)
                          : random_feature(panel.matrix.respondent_ids(), f.name, f.prevalence, seed));
    }
    features = merge_features(parts);
    io::write_text(out / "features.csv", io::features_csv(*features));
  }
  if (cfg.collapse) {
    const auto collapsed = apply_collapse(panel, *cfg.collapse, features ? &*features : nullptr, "collapsed");
    io::write_panel(out / "collapsed.panel", collapsed);
  }
  std::cerr << fmt::format("synth: {} x {} panel written to {}\n", panel.matrix.rows(),
                           panel.matrix.cols(), out.string());
}

struct ReportArgs {
  std::vector<std::string> panels, baselines, variants;
  std::string out, variance = "population";
};

void run_report(const ReportArgs& a) {
  if (a.panels.empty() && a.baselines.empty()) throw InputError("report: no panels given");
  if (a.baselines.size() != a.variants.size()) {
    throw InputError("report: --baseline and --variant must be given in pairs");
  }
  AnalyzeInputs in;
  auto panels = read_panels(a.panels);
  for (std::size_t i = 0; i < a.baselines.size(); ++i) {
    in.variants.push_back({io::read_panel(fs::path(a.baselines[i])), io::read_panel(fs::path(a.variants[i]))});
  }
  if (panels.empty()) panels.push_back(in.variants.front().baseline);
  in.human = panels.front();
  in.models.assign(panels.begin() + 1, panels.end());
  AnalyzeOptions o;
  o.summary_only = true;
  o.convention = parse_convention(a.variance);
  emit(a.out, render_report(analyze(in, o)));
}

struct HeatmapArgs {
  std::string panel, out, title;
  int cell = 6;
};

void run_heatmap(const HeatmapArgs& a) {
  const auto panel = io::read_panel(fs::path(a.panel));
  HeatmapOptions o;
  o.cell_width = o.cell_height = a.cell;
  o.title = a.title;
  emit(a.out.empty() ? fs::path(a.panel).replace_extension(".svg").string() : a.out,
       emit_heatmap_svg(panel, o));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"silfid: survey panel fidelity toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.footer(kFormats);
  app.require_subcommand(1);
  std::function<void()> action;

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Normalize raw responses into a .panel");
  ingest->add_option("--catalog", ia.catalog, "Question catalog (jsonl)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--responses", ia.responses, "Raw responses (jsonl)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--profiles", ia.profiles, "Profiles fixing respondent order")->check(CLI::ExistingFile);
  ingest->add_option("--plan", ia.plan_in, "Reuse a normalization plan instead of building one")
      ->check(CLI::ExistingFile);
  ingest->add_option("--plan-out", ia.plan_out, "Write the normalization plan");
  ingest->add_option("--rule", ia.rule, "Popularity rule for non-binary questions")
      ->check(CLI::IsMember({"endorsement", "any_stance"}))->capture_default_str();
  ingest->add_option("--tag", ia.tag, "Source tag of the panel")->capture_default_str();
  ingest->add_option("--log", ia.log_out, "CSV of dropped contradictory cells");
  ingest->add_option("-o,--out", ia.out, "Output .panel")->required();
  ingest->callback([&] { action = [&] { run_ingest(ia); }; });

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Survey a chat model conditioned on each profile");
  sample->add_option("--profiles", sa.profiles, "Profiles (jsonl)")->required()->check(CLI::ExistingFile);
  sample->add_option("--catalog", sa.catalog, "Question catalog (jsonl)")->required()->check(CLI::ExistingFile);
  sample->add_option("--endpoint", sa.cfg.endpoint, "Chat-completion URL")->required();
  sample->add_option("--model", sa.cfg.model, "Model name sent in the request")->required();
  sample->add_option("--temperature", sa.cfg.temperature)->capture_default_str();
  sample->add_option("--parallel", sa.cfg.max_parallel, "Concurrent requests")->capture_default_str();
  sample->add_option("--retries", sa.cfg.retries, "Retries per cell")->capture_default_str();
  sample->add_option("--backoff-ms", sa.backoff_ms, "Initial retry backoff")->capture_default_str();
  sample->add_option("--timeout", sa.timeout_s, "Request timeout, seconds")->capture_default_str();
  sample->add_option("--variant", sa.variant, "Prompt framing")
      ->check(CLI::IsMember({"baseline", "direct"}))->capture_default_str();
  sample->add_option("--token-env", sa.cfg.token_env, "Environment variable with the bearer token")
      ->capture_default_str();
  sample->add_option("--checkpoint", sa.checkpoint, "Per-cell checkpoint (default <out>.checkpoint)");
  sample->add_flag("--resume", sa.cfg.resume, "Skip cells already in the checkpoint");
  sample->add_option("--stats-out", sa.stats_out, "Parse statistics JSON (default <out>.stats.json)");
  sample->add_option("-o,--out", sa.out, "Output raw responses (jsonl)")->required();
  sample->callback([&] { action = [&] { run_sample(sa); }; });

  AnalyzeArgs aa;
  auto* an = app.add_subcommand("analyze", "Compare model panels against a human panel");
  an->add_option("--human", aa.human, "Reference .panel")->required()->check(CLI::ExistingFile);
  an->add_option("--model", aa.models, "Model .panel (repeatable)")->check(CLI::ExistingFile);
  an->add_option("--seed", aa.seed, "Seed for permutation tests")->capture_default_str();
  an->add_option("--perm", aa.n_perm, "Mantel permutations")->capture_default_str();
  an->add_option("--min-overlap", aa.min_overlap, "Pairwise-deletion floor")->capture_default_str();
  an->add_option("--rv-mode", aa.rv_mode, "RV operands")
      ->check(CLI::IsMember({"data", "correlation"}))->capture_default_str();
  an->add_option("--variance", aa.variance, "Variance convention")
      ->check(CLI::IsMember({"population", "sample"}))->capture_default_str();
  an->add_option("--ncp", aa.ncp, "Imputation components")->capture_default_str();
  an->add_option("--catalog", aa.catalog, "Catalog for the domain table")->check(CLI::ExistingFile);
  an->add_option("--profiles", aa.profiles, "Profiles for effect verdicts")->check(CLI::ExistingFile);
  an->add_option("--features", aa.features, "Feature CSV for effect verdicts")->check(CLI::ExistingFile);
  an->add_option("--gate", aa.gate, "Test gating significance")
      ->check(CLI::IsMember({"chi2", "welch"}))->capture_default_str();
  an->add_option("--alpha", aa.alpha)->capture_default_str();
  an->add_option("-o,--out", aa.out, "Report directory (report.txt + CSVs); stdout when omitted");
  an->callback([&] { action = [&] { run_analyze(aa); }; });

  EffectsArgs ea;
  auto* ef = app.add_subcommand("effects", "Feature x question effect scan and spurious-effect verdicts");
  ef->add_option("--panel", ea.panel, "Ground-truth .panel")->required()->check(CLI::ExistingFile);
  ef->add_option("--model", ea.models, "Model .panel (repeatable)")->check(CLI::ExistingFile);
  ef->add_option("--profiles", ea.profiles, "Profiles to derive features")->check(CLI::ExistingFile);
  ef->add_option("--features", ea.features, "Feature CSV")->check(CLI::ExistingFile);
  ef->add_option("--gate", ea.gate)->check(CLI::IsMember({"chi2", "welch"}))->capture_default_str();
  ef->add_option("--alpha", ea.alpha)->capture_default_str();
  ef->add_option("--min-valid", ea.min_valid, "Minimum answers per test")->capture_default_str();
  ef->add_option("-o,--out", ea.out, "Output directory")->required();
  ef->callback([&] { action = [&] { run_effects(ea); }; });

  PcaArgs pa;
  auto* pc = app.add_subcommand("pca", "Iterative imputation, PCA and optional component alignment");
  pc->add_option("--panel", pa.panel, ".panel to decompose")->required()->check(CLI::ExistingFile);
  pc->add_option("--ncp", pa.ncp, "Imputation components")->capture_default_str();
  pc->add_option("--components", pa.components, "Loadings columns to write")->capture_default_str();
  pc->add_option("--threshold", pa.threshold, "Explained share counted as significant")->capture_default_str();
  pc->add_option("--align-with", pa.align_with, "Second .panel to align components with")
      ->check(CLI::ExistingFile);
  pc->add_option("-k", pa.k, "Components to align")->capture_default_str();
  pc->add_option("--imputed-out", pa.imputed_out, "Persist the imputed matrix as a .panel");
  pc->add_option("-o,--out", pa.out, "Output directory")->required();
  pc->callback([&] { action = [&] { run_pca(pa); }; });

  DpoArgs da;
  auto* dp = app.add_subcommand("dpo-export", "Preference pairs and supervised targets for fine-tuning");
  dp->add_option("--responses", da.responses, "Raw responses (jsonl)")->required()->check(CLI::ExistingFile);
  dp->add_option("--profiles", da.profiles, "Profiles (jsonl)")->required()->check(CLI::ExistingFile);
  dp->add_option("--catalog", da.catalog, "Question catalog (jsonl)")->required()->check(CLI::ExistingFile);
  dp->add_option("--variant", da.variant)->check(CLI::IsMember({"baseline", "direct"}))->capture_default_str();
  dp->add_option("--rejected-mode", da.mode, "How rejected answers are formed")
      ->check(CLI::IsMember({"same_option", "complement_option"}))->capture_default_str();
  dp->add_option("-o,--out", da.out, "Output directory")->required();
  dp->callback([&] { action = [&] { run_dpo_export(da); }; });

  SynthArgs ya;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic panel with known structure");
  sy->add_option("--config", ya.config, "Synth config (JSON)")->required()->check(CLI::ExistingFile);
  sy->add_option("-o,--out", ya.out, "Output directory")->required();
  sy->callback([&] { action = [&] { run_synth(ya); }; });

  ReportArgs ra;
  auto* rp = app.add_subcommand("report", "Panel summaries and prompt-variant sensitivity");
  rp->add_option("--panel", ra.panels, ".panel (repeatable)")->check(CLI::ExistingFile);
  rp->add_option("--baseline", ra.baselines, "Baseline-framing .panel (repeatable)")->check(CLI::ExistingFile);
  rp->add_option("--variant", ra.variants, "Matching variant-framing .panel")->check(CLI::ExistingFile);
  rp->add_option("--variance", ra.variance)->check(CLI::IsMember({"population", "sample"}))->capture_default_str();
  rp->add_option("-o,--out", ra.out, "Output file (stdout when omitted)");
  rp->callback([&] { action = [&] { run_report(ra); }; });

  HeatmapArgs ha;
  auto* hm = app.add_subcommand("heatmap", "Render a panel as an SVG heatmap");
  hm->add_option("--panel", ha.panel, ".panel to render")->required()->check(CLI::ExistingFile);
  hm->add_option("--cell", ha.cell, "Cell size in pixels")->capture_default_str();
  hm->add_option("--title", ha.title, "Title (default: source tag)");
  hm->add_option("-o,--out", ha.out, "Output SVG (default: panel path with .svg)");
  hm->callback([&] { action = [&] { run_heatmap(ha); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    action();
  } catch (const silfid::Error& e) {
    std::cerr << "silfid " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "silfid: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
