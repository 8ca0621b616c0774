#include "silfid/report.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/io.hpp"
#include "text_util.hpp"

namespace silfid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return fmt::format("{:.6f}", v); }
std::string pval(double v) { return fmt::format("{:.6g}", v); }

std::string file_tag(const std::string& tag) {
  std::string out;
  for (char c : tag) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "panel" : out;
}

const char* convention_name(stats::VarianceConvention c) {
  return c == stats::VarianceConvention::population ? "population" : "sample";
}

template <typename F>
std::string guarded(F&& f) {
  try {
    f();
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

void add_pca_row(AnalysisReport& rep, const ResponseMatrix& m, const AnalyzeOptions& o) {
  AnalysisReport::PcaRow row;
  row.source = m.source_tag();
  row.error = guarded([&] {
    const auto imputed = iterative_impute(m, o.imputation);
    row.iterations = imputed.iterations;
    row.converged = imputed.converged;
    auto model = fit_pca(imputed);
    row.significant = count_significant(model, o.component_threshold);
    row.top6 = model.cumulative_ratio(6);
    row.dropped = model.dropped_question_ids.size();
    row.model = std::move(model);
  });
  rep.pca.push_back(std::move(row));
}

}  // namespace

AnalysisReport analyze(const AnalyzeInputs& in, const AnalyzeOptions& o) {
  AnalysisReport rep;
  std::set<std::string> tags{in.human.source_tag()};
  for (const auto& m : in.models) {
    if (!tags.insert(m.source_tag()).second) {
      throw InputError("analyze: duplicate source tag " + m.source_tag());
    }
  }

  rep.metadata = {
      {"tool", "silfid"},
      {"version", kVersion},
      {"seed", std::to_string(o.seed)},
      {"reference", in.human.source_tag()},
      {"variance_convention", convention_name(o.convention)},
      {"divergence_log_base", "e"},
      {"entropy_log_base", "2"},
      {"smoothing_epsilon", fmt::format("{}", kSmoothingEpsilon)},
      {"histogram_bins", std::to_string(kDefaultBins)},
      {"kl_direction", "reference||model for cells; model||reference for correlations"},
      {"min_overlap", std::to_string(o.min_overlap)},
      {"mantel_permutations", std::to_string(o.n_perm)},
      {"rv_mode", to_string(o.rv_mode)},
      {"pca_standardization", "correlation"},
      {"imputation", fmt::format("ncp={} tol={} max_iter={}", o.imputation.ncp,
                                 o.imputation.tolerance, o.imputation.max_iterations)},
      {"component_threshold", fmt::format("{}", o.component_threshold)},
      {"load_r_sign_mode", "aligned and raw"},
      {"effect_gate", to_string(o.classify.gate)},
      {"alpha", fmt::format("{}", o.classify.alpha)},
      {"amplification_factor", fmt::format("{}", o.classify.amplification)},
      {"small_effect_pp", fmt::format("{}", o.classify.small_diff_pp)},
      {"conditioned_min_variance", fmt::format("{}", o.conditioned_min_variance)},
  };

  rep.panels.push_back({in.human.source_tag(), panel_summary(in.human, o.convention)});
  for (const auto& m : in.models) rep.panels.push_back({m.source_tag(), panel_summary(m, o.convention)});

  for (const auto& v : in.variants) {
    AnalysisReport::SensitivityRow row;
    row.baseline = v.baseline.source_tag();
    row.variant = v.variant.source_tag();
    row.error = guarded([&] { row.sensitivity = compare_prompt_variants(v.baseline, v.variant); });
    rep.sensitivity.push_back(std::move(row));
  }
  if (o.summary_only) return rep;

  std::vector<std::pair<ResponseMatrix, ResponseMatrix>> aligned;
  for (const auto& m : in.models) {
    aligned.push_back(align_panels(in.human, m));
  }

  for (std::size_t i = 0; i < in.models.size(); ++i) {
    const auto& [h, m] = aligned[i];
    AnalysisReport::SimilarityRow sim{m.source_tag(), {}, {}};
    sim.error = guarded([&] { sim.similarity = flattened_similarity(h, m); });
    if (!sim.error.empty()) sim.similarity = {kNaN, kNaN, kNaN, 0};
    rep.similarity.push_back(std::move(sim));

    AnalysisReport::StructureRow st{m.source_tag(), {}, {}};
    st.error = guarded([&] {
      st.comparison = compare_structure(h, m, {o.min_overlap, o.n_perm, o.seed, o.rv_mode});
    });
    rep.structure.push_back(std::move(st));

    AnalysisReport::ConditionedRow cr{m.source_tag(), {}, {}};
    cr.error = guarded([&] { cr.correlation = conditioned_correlation(h, m, o.conditioned_min_variance); });
    rep.conditioned.push_back(std::move(cr));
  }

  {
    std::vector<ResponseMatrix> all{in.human};
    all.insert(all.end(), in.models.begin(), in.models.end());
    if (all.size() > 1) {
      guarded([&] { rep.pairwise = pairwise_similarity(all); });
    }
  }

  rep.corr_matrices.emplace(in.human.source_tag(), pairwise_corr_matrix(in.human, o.min_overlap));
  for (const auto& m : in.models) {
    rep.corr_matrices.emplace(m.source_tag(), pairwise_corr_matrix(m, o.min_overlap));
  }

  add_pca_row(rep, in.human, o);
  for (const auto& m : in.models) add_pca_row(rep, m, o);
  const auto& human_pca = rep.pca.front();
  for (std::size_t i = 0; i < in.models.size(); ++i) {
    const auto& mp = rep.pca[i + 1];
    AnalysisReport::AlignmentRow row{mp.source, {}, {}};
    if (!human_pca.model || !mp.model) {
      row.error = "pca unavailable";
    } else {
      row.error = guarded([&] { row.alignment = align_components(*human_pca.model, *mp.model, o.align_k); });
    }
    rep.alignment.push_back(std::move(row));
  }

  {
    AnalysisReport::DiversityRow hd{in.human.source_tag(), {}, {}};
    hd.error = guarded([&] { hd.stats = diversity_stats(in.human); });
    rep.diversity.push_back(std::move(hd));
  }
  for (std::size_t i = 0; i < in.models.size(); ++i) {
    const auto& [h, m] = aligned[i];
    AnalysisReport::DiversityRow row{m.source_tag(), {}, {}};
    row.error = guarded([&] { row.stats = mode_collapse_report(m, h); });
    rep.diversity.push_back(std::move(row));
  }

  std::vector<RmseTable> tables;
  for (std::size_t i = 0; i < in.models.size(); ++i) {
    const auto& [h, m] = aligned[i];
    tables.push_back(per_question_rmse(h, m));
    rep.rmse.push_back({m.source_tag(), tables.back().panel_mean, tables.back().questions.size()});
  }
  if (!tables.empty()) {
    rep.mean_rmse = average_rmse(tables);
    rep.rmse_variance_error =
        guarded([&] { rep.rmse_variance = rmse_variance_corr(*rep.mean_rmse, in.human, o.convention); });
    if (o.catalog != nullptr) {
      rep.domains_error =
          guarded([&] { rep.domains = domain_rmse(*rep.mean_rmse, *o.catalog, in.human, o.convention); });
    }
  }

  if (o.features != nullptr) {
    rep.effect_scans.emplace_back(in.human.source_tag(), effect_scan(in.human, *o.features));
    std::vector<NamedEffects> model_tests;
    for (const auto& m : in.models) {
      auto scan = effect_scan(m, *o.features);
      model_tests.emplace_back(m.source_tag(), scan.tests);
      rep.effect_scans.emplace_back(m.source_tag(), std::move(scan));
    }
    rep.verdicts = classify_spurious(rep.effect_scans.front().second.tests, model_tests, o.classify);
  }
  return rep;
}

std::string render_report(const AnalysisReport& r) {
  std::string out = "# silfid analysis report\n\n[metadata]\n";
  for (const auto& [k, v] : r.metadata) out += fmt::format("{} = {}\n", k, v);

  out += "\n[panels]\nsource,respondents,questions,responses,response_rate,mean_variance\n";
  for (const auto& p : r.panels) {
    const auto& s = p.summary;
    out += fmt::format("{},{},{},{},{},{}\n", detail::csv_field(p.source), s.n_respondents,
                       s.n_questions, s.n_responses, num(s.response_rate),
                       s.mean_per_question_variance ? num(*s.mean_per_question_variance) : "NA");
  }

  auto error_col = [](const std::string& e) { return e.empty() ? std::string() : detail::csv_field(e); };

  if (!r.similarity.empty()) {
    out += "\n[similarity]\nmodel,kl,js,pearson_r,n_cells,error\n";
    for (const auto& s : r.similarity) {
      out += fmt::format("{},{},{},{},{},{}\n", detail::csv_field(s.model), num(s.similarity.kl),
                         num(s.similarity.js), num(s.similarity.pearson_r),
                         s.similarity.n_matched_cells, error_col(s.error));
    }
  }
  if (!r.structure.empty()) {
    out += "\n[structure]\nmodel,elementwise_r,elementwise_p,mantel_r,mantel_p,rv,corr_kl,corr_js,n_pairs,error\n";
    for (const auto& s : r.structure) {
      const auto& c = s.comparison;
      out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", detail::csv_field(s.model),
                         num(c.elementwise_r), pval(c.elementwise_p), num(c.mantel_r),
                         pval(c.mantel_p), num(c.rv), num(c.corr_kl), num(c.corr_js),
                         c.n_common_pairs, error_col(s.error));
    }
  }
  if (!r.conditioned.empty()) {
    out += "\n[conditioned]\nmodel,pearson_r,questions,cells,error\n";
    for (const auto& c : r.conditioned) {
      out += fmt::format("{},{},{},{},{}\n", detail::csv_field(c.model), num(c.correlation.pearson_r),
                         c.correlation.n_questions, c.correlation.n_cells, error_col(c.error));
    }
  }
  if (!r.pca.empty()) {
    out += "\n[pca]\nsource,significant_components,top6_ratio,iterations,converged,dropped_questions,error\n";
    for (const auto& p : r.pca) {
      out += fmt::format("{},{},{},{},{},{},{}\n", detail::csv_field(p.source), p.significant,
                         num(p.top6), p.iterations, p.converged ? "yes" : "no", p.dropped,
                         error_col(p.error));
    }
  }
  if (!r.alignment.empty()) {
    out += "\n[pca_alignment]\nmodel,score,load_r,load_r_raw,top5_overlap,pairing,error\n";
    for (const auto& a : r.alignment) {
      std::string pairing;
      for (const auto& p : a.alignment.pairs) {
        pairing += fmt::format("{}PC{}~PC{}", pairing.empty() ? "" : " ", p.a_component + 1,
                               p.b_component + 1);
      }
      out += fmt::format("{},{},{},{},{},{},{}\n", detail::csv_field(a.model), num(a.alignment.score),
                         num(a.alignment.flattened_r), num(a.alignment.flattened_r_raw),
                         num(a.alignment.mean_top5_overlap), pairing, error_col(a.error));
    }
  }
  if (!r.diversity.empty()) {
    out += "\n[diversity]\nsource,mean_entropy_bits,effective_categories,mean_variance,mean_mode_share,"
           "near_uniform_questions,zero_variance_questions,collapse_ratio,error\n";
    for (const auto& d : r.diversity) {
      const auto& s = d.stats;
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", detail::csv_field(d.source),
                         num(s.mean_entropy_bits), num(s.effective_categories), num(s.mean_variance),
                         num(s.mean_mode_share), s.near_uniform_questions, s.zero_variance_questions,
                         num(s.collapse_ratio), error_col(d.error));
    }
  }
  if (!r.rmse.empty()) {
    out += "\n[predictability]\nmodel,mean_rmse,questions\n";
    for (const auto& x : r.rmse) {
      out += fmt::format("{},{},{}\n", detail::csv_field(x.model), num(x.panel_mean_rmse), x.questions);
    }
    if (r.mean_rmse) out += fmt::format("models_mean_rmse = {}\n", num(r.mean_rmse->panel_mean));
    if (r.rmse_variance) {
      out += fmt::format("rmse_variance_r = {}\nrmse_variance_p = {}\n", num(r.rmse_variance->r),
                         pval(r.rmse_variance->p));
    } else if (!r.rmse_variance_error.empty()) {
      out += fmt::format("rmse_variance_error = {}\n", r.rmse_variance_error);
    }
  }
  if (!r.domains.empty() || !r.domains_error.empty()) {
    out += "\n[domains]\n";
    if (!r.domains_error.empty()) out += fmt::format("error = {}\n", r.domains_error);
    else out += domain_csv(r.domains);
  }
  if (!r.effect_scans.empty()) {
    out += "\n[effects]\nsource,tests,ineligible_pairs\n";
    for (const auto& [tag, scan] : r.effect_scans) {
      out += fmt::format("{},{},{}\n", detail::csv_field(tag), scan.tests.size(), scan.ineligible_pairs);
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& v : r.verdicts) ++counts[to_string(v.classification)];
    for (const char* c : {"matching", "amplified", "spurious", "absent"}) {
      out += fmt::format("verdicts_{} = {}\n", c, counts[c]);
    }
    bool header = false;
    for (const auto& v : r.verdicts) {
      if (v.classification == EffectClass::absent) continue;
      if (!header) {
        out += "\n[effect_verdicts]\nfeature,question_id,gt_diff_pp,gt_p,gt_p_bonferroni,model_diff_pp,models_significant,classification\n";
        header = true;
      }
      out += fmt::format("{},{},{:.2f},{},{},{:.2f},{}/{},{}\n", detail::csv_field(v.feature),
                         detail::csv_field(v.question_id), v.gt_diff_pp, pval(v.gt_p),
                         pval(v.gt_p_bonferroni), v.model_diff_pp,
                         v.n_models_significant, v.models.size(), to_string(v.classification));
    }
  }
  if (!r.sensitivity.empty()) {
    out += "\n[prompt_sensitivity]\nbaseline,variant,pearson_r,mean_abs_diff,rmse,flip_rate,mean_shift,n_pairs,error\n";
    for (const auto& s : r.sensitivity) {
      const auto& x = s.sensitivity;
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", detail::csv_field(s.baseline),
                         detail::csv_field(s.variant), num(x.pearson_r), num(x.mean_abs_diff),
                         num(x.rmse), num(x.flip_rate), num(x.mean_shift), x.n_pairs, error_col(s.error));
    }
  }
  return out;
}

std::map<std::string, std::string> report_csvs(const AnalysisReport& r) {
  std::map<std::string, std::string> files;
  if (r.pairwise) {
    files["pairwise_kl.csv"] = similarity_matrix_csv(*r.pairwise, SimilarityMetric::kl);
    files["pairwise_js.csv"] = similarity_matrix_csv(*r.pairwise, SimilarityMetric::js);
    files["pairwise_r.csv"] = similarity_matrix_csv(*r.pairwise, SimilarityMetric::pearson_r);
  }
  for (const auto& [tag, c] : r.corr_matrices) {
    files["corr_" + file_tag(tag) + ".csv"] = corr_matrix_csv(c);
    files["overlap_" + file_tag(tag) + ".csv"] = overlap_csv(c);
  }
  for (const auto& p : r.pca) {
    if (!p.model) continue;
    files["loadings_" + file_tag(p.source) + ".csv"] = loadings_csv(*p.model, 6);
    files["ratios_" + file_tag(p.source) + ".csv"] = ratios_csv(*p.model);
  }
  for (const auto& d : r.diversity) {
    if (d.error.empty()) files["diversity_" + file_tag(d.source) + ".csv"] = diversity_csv(d.stats);
  }
  if (r.mean_rmse) files["rmse.csv"] = rmse_csv(*r.mean_rmse);
  if (!r.domains.empty()) files["domains.csv"] = domain_csv(r.domains);
  for (const auto& [tag, scan] : r.effect_scans) {
    files["effects_" + file_tag(tag) + ".csv"] = effects_csv(scan.tests);
  }
  if (!r.effect_scans.empty()) files["verdicts.csv"] = verdicts_csv(r.verdicts);
  return files;
}

void write_report(const std::filesystem::path& dir, const AnalysisReport& report) {
  io::write_text(dir / "report.txt", render_report(report));
  for (const auto& [name, content] : report_csvs(report)) io::write_text(dir / name, content);
}

}  // namespace silfid
