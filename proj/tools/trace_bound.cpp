// trace-bound: evaluates the geometric-side terms for one level, sweeps a
// range of levels into CSV, or runs the built-in self-test suites.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracebound/assembler.hpp"
#include "tracebound/selftest.hpp"

using nlohmann::json;
using namespace tracebound;

namespace {

std::vector<double> parse_a(const std::string& spec, const NumberFieldDescriptor& F) {
  if (spec == "auto") return {};
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if ((int)out.size() == 1 && F.num_arch_places() > 1) out.assign(F.num_arch_places(), out[0]);
  return out;
}

json term_json(const TermEntry& t) {
  json j;
  j["value"] = t.value;
  j["ok"] = t.ok;
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

json report_json(const TraceBoundReport& r, const AssemblyConfig& cfg) {
  json j;
  j["field"] = r.field_spec;
  j["ideal_norm"] = r.ideal_norm;
  j["gamma0_index"] = r.gamma0_index;
  j["A_J"] = r.a_j;
  j["a"] = r.a;
  j["a_capped"] = r.a_capped;
  j["mode"] = r.mode == Mode::Rigorous ? "rigorous" : "numeric";
  j["paper_losses"] = r.paper_losses;
  j["terms"]["S_one"] = term_json(r.one);
  j["terms"]["S_id"] = term_json(r.id);
  j["terms"]["S_ell"] = term_json(r.ell);
  j["terms"]["S_hyp"] = term_json(r.hyp);
  j["terms"]["S_par"] = term_json(r.par);
  j["terms"]["S_Eis"] = term_json(r.eis);
  j["terms"]["S_Res"] = term_json(r.res);
  j["h0_product"] = r.h0_product;
  j["normalizer"] = r.normalizer;
  j["total"] = r.total;
  j["ratio"] = r.ratio;
  j["elliptic_class_count"] = r.elliptic_class_count;
  j["hyperbolic_unit_count"] = r.hyperbolic_unit_count;
  j["config"]["covolume_constant"] = cfg.covolume_constant;
  j["config"]["covolume_provenance"] = cfg.covolume_provenance;
  j["config"]["idele_volume_constant"] = cfg.idele_volume_constant;
  j["config"]["idele_volume_provenance"] = cfg.idele_volume_provenance;
  j["config"]["haar_match_constant"] = cfg.haar_match_constant;
  j["config"]["class_cap"] = cfg.class_cap;
  return j;
}

void print_report(const TraceBoundReport& r) {
  std::printf("field %s, ideal norm %lld, index %lld, mode %s\n", r.field_spec.c_str(), r.ideal_norm,
              r.gamma0_index, r.mode == Mode::Rigorous ? "rigorous" : "numeric");
  std::printf("a =");
  for (double a : r.a) std::printf(" %g", a);
  if (r.a_capped) std::printf("  (asymptotic scale choice exceeded 1, capped)");
  std::printf("\n");
  auto line = [](const char* name, const TermEntry& t) {
    if (t.ok)
      std::printf("  %-6s %.12e\n", name, t.value);
    else
      std::printf("  %-6s FAILED (%s)\n", name, t.note.c_str());
  };
  line("S_one", r.one);
  line("S_id", r.id);
  line("S_ell", r.ell);
  line("S_hyp", r.hyp);
  line("S_par", r.par);
  line("S_Eis", r.eis);
  line("S_Res", r.res);
  std::printf("normalizer %.12e  total %.12e  ratio %.12e\n", r.normalizer, r.total, r.ratio);
  std::printf("classes %zu, window units %zu\n", r.elliptic_class_count, r.hyperbolic_unit_count);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric-side trace bound evaluator"};
  app.require_subcommand(1);

  std::string field_spec = "Q", a_spec = "auto", mode_spec = "rigorous";
  std::string json_path, out_path, norm_spec;
  long long ideal_norm = 1;
  bool paper_losses = false;
  int jobs = 1;
  AssemblyConfig cfg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--field", field_spec, "Q or quad:<d> with d squarefree");
    cmd->add_option("--mode", mode_spec, "rigorous|numeric")->check(CLI::IsMember({"rigorous", "numeric"}));
    cmd->add_option("--a", a_spec, "auto or per-place scale list x[,x]");
    cmd->add_flag("--paper-losses", paper_losses, "use the coarse per-class product chain");
    cmd->add_option("--covolume", cfg.covolume_constant, "covolume constant");
    cmd->add_option("--idele-volume", cfg.idele_volume_constant, "idele class volume constant");
    cmd->add_option("--haar-match", cfg.haar_match_constant, "Haar matching constant");
    cmd->add_option("--class-cap", cfg.class_cap, "elliptic enumeration cap");
  };

  CLI::App* compute = app.add_subcommand("compute", "evaluate one level");
  add_common(compute);
  compute->add_option("--ideal", ideal_norm, "positive integer generating the level ideal")->required();
  compute->add_option("--json", json_path, "write the JSON report here");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "evaluate a range of levels into CSV");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--norms", norm_spec, "a..b, primes:a..b, or comma list")->required();
  sweep_cmd->add_option("--out", out_path, "output CSV path")->required();
  sweep_cmd->add_option("-j,--jobs", jobs, "worker threads");
  bool resume = false;
  sweep_cmd->add_flag("--resume", resume, "skip rows already present in the output file");

  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run invariant suites");
  std::string suite = "all";
  selftest_cmd->add_option("suite", suite, "transforms|local|arch|all")
      ->check(CLI::IsMember({"transforms", "local", "arch", "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest_cmd->parsed()) return tracebound::selftest::run(suite);

    const NumberFieldDescriptor F = parse_field(field_spec);
    cfg.mode = mode_spec == "numeric" ? Mode::Numeric : Mode::Rigorous;
    cfg.paper_losses = paper_losses;
    cfg.a = parse_a(a_spec, F);

    if (compute->parsed()) {
      const TraceBoundReport rep = assemble_bound(F, factor_ideal(F, ideal_norm), cfg);
      print_report(rep);
      if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << report_json(rep, cfg).dump(2) << "\n";
      }
      return rep.all_ok() ? 0 : 2;
    }

    // sweep
    std::vector<long long> norms = parse_norm_spec(norm_spec);
    std::size_t skip = 0;
    bool fresh = true;
    if (resume) {
      std::ifstream in(out_path);
      std::string line;
      while (std::getline(in, line))
        if (!line.empty() && line[0] != 'A') ++skip;
      if (skip > 0) fresh = false;
      if (skip >= norms.size()) return 0;
      norms.erase(norms.begin(), norms.begin() + skip);
    }
    std::ofstream out(out_path, fresh ? std::ios::trunc : std::ios::app);
    if (fresh) out << csv_header() << "\n";
    const auto reports =
        sweep(F, norms, cfg, jobs, [&](const std::string& row) { out << row << "\n"; });
    bool ok = true;
    for (const auto& r : reports) ok = ok && r.all_ok();
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
