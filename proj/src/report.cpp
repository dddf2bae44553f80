#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rlmut/error.hpp"
#include "rlmut/pipeline.hpp"

namespace rlmut {

namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Fixed precision for drawing coordinates.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

json pairing_json(const PairingCheck& p) {
  return json{{"original_episodes", p.original_episodes},
              {"mutant_episodes", p.mutant_episodes},
              {"shared_prefix", p.shared_prefix},
              {"mutant_is_prefix", p.mutant_is_prefix}};
}

PairingCheck pairing_from(const json& j) {
  PairingCheck p;
  p.original_episodes = j.at("original_episodes").get<std::size_t>();
  p.mutant_episodes = j.at("mutant_episodes").get<std::size_t>();
  p.shared_prefix = j.at("shared_prefix").get<bool>();
  p.mutant_is_prefix = j.at("mutant_is_prefix").get<bool>();
  return p;
}

json operator_json(const OperatorReport& op) {
  json configs = json::array();
  for (const ConfigReport& c : op.configs) {
    json pairing = json::array();
    for (const PairingCheck& p : c.pairing) pairing.push_back(pairing_json(p));
    configs.push_back(json{{"spec", c.spec},
                           {"replay", c.replay},
                           {"killable", c.killable},
                           {"trivial_ratio", optional_json(c.trivial_ratio)},
                           {"trivial", c.trivial},
                           {"representative", c.representative},
                           {"generators", c.generators},
                           {"pairing", pairing}});
  }
  return json{{"operator", to_string(op.op)},
              {"original", op.original},
              {"exhausted", op.exhausted},
              {"configs", configs},
              {"percent_killable", op.percent_killable},
              {"percent_trivial", op.percent_trivial},
              {"status", to_string(op.status)},
              {"representative", optional_json(op.representative)},
              {"scores", op.scores},
              {"sensitivity", optional_json(op.sensitivity)}};
}

OperatorReport operator_from(const json& j) {
  OperatorReport op;
  op.op = operator_from_string(j.at("operator").get<std::string>());
  op.original = j.at("original").get<double>();
  op.exhausted = j.at("exhausted").get<bool>();
  for (const json& c : j.at("configs")) {
    ConfigReport cr;
    cr.spec = c.at("spec").get<MutantSpec>();
    cr.replay = c.at("replay").get<KillRecord>();
    cr.killable = c.at("killable").get<bool>();
    cr.trivial_ratio = optional_from<double>(c.at("trivial_ratio"));
    cr.trivial = c.at("trivial").get<bool>();
    cr.representative = c.at("representative").get<bool>();
    cr.generators = c.at("generators").get<std::map<std::string, KillRecord>>();
    for (const json& p : c.at("pairing")) cr.pairing.push_back(pairing_from(p));
    op.configs.push_back(std::move(cr));
  }
  op.percent_killable = j.at("percent_killable").get<double>();
  op.percent_trivial = j.at("percent_trivial").get<double>();
  op.status = selection_status_from_string(j.at("status").get<std::string>());
  op.representative = optional_from<int>(j.at("representative"));
  op.scores = j.at("scores").get<std::map<std::string, double>>();
  op.sensitivity = optional_from<double>(j.at("sensitivity"));
  return op;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Bar {
  double value;
  const char* fill;
};

struct Group {
  std::string label;
  std::vector<Bar> bars;
};

// Vertical bars over a fixed [0, 1] axis.
std::string bar_chart(const std::string& title, const std::vector<Group>& groups,
                      const std::vector<std::pair<std::string, const char*>>& legend) {
  const double left = 60, top = 40, plot_h = 240, bar_w = 28, gap = 36;
  std::size_t per_group = 0;
  for (const Group& g : groups) per_group = std::max(per_group, g.bars.size());
  const double group_w = bar_w * static_cast<double>(per_group) + gap;
  const double plot_w = group_w * static_cast<double>(groups.size()) + gap;
  const double width = left + plot_w + 140;
  const double height = top + plot_h + 60;
  const double base = top + plot_h;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
    << px(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << px(left) << "\" y=\"24\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    const double y = base - v * plot_h;
    s << "<line x1=\"" << px(left) << "\" y1=\"" << px(y) << "\" x2=\"" << px(left + plot_w)
      << "\" y2=\"" << px(y) << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << px(left - 8) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">"
      << px(v) << "</text>\n";
  }
  s << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\"" << px(left) << "\" y2=\""
    << px(base) << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << px(left) << "\" y1=\"" << px(base) << "\" x2=\"" << px(left + plot_w)
    << "\" y2=\"" << px(base) << "\" stroke=\"black\"/>\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = left + gap + group_w * static_cast<double>(g);
    s << "<g class=\"group\">\n";
    for (std::size_t b = 0; b < groups[g].bars.size(); ++b) {
      const double v = std::clamp(groups[g].bars[b].value, 0.0, 1.0);
      const double h = v * plot_h;
      s << "<rect x=\"" << px(x0 + bar_w * static_cast<double>(b)) << "\" y=\"" << px(base - h)
        << "\" width=\"" << px(bar_w - 2) << "\" height=\"" << px(h) << "\" fill=\""
        << groups[g].bars[b].fill << "\"><title>" << px(v) << "</title></rect>\n";
    }
    s << "</g>\n";
    s << "<text x=\"" << px(x0 + bar_w * static_cast<double>(groups[g].bars.size()) / 2)
      << "\" y=\"" << px(base + 18) << "\" text-anchor=\"middle\">" << xml_escape(groups[g].label)
      << "</text>\n";
  }
  for (std::size_t k = 0; k < legend.size(); ++k) {
    const double y = top + 18.0 * static_cast<double>(k);
    s << "<rect x=\"" << px(left + plot_w + 20) << "\" y=\"" << px(y) << "\" width=\"12\" height=\"12\" fill=\""
      << legend[k].second << "\"/>\n";
    s << "<text x=\"" << px(left + plot_w + 38) << "\" y=\"" << px(y + 10) << "\">"
      << xml_escape(legend[k].first) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

nlohmann::json report_to_json(const MutationReport& report) {
  json ops = json::array();
  for (const OperatorReport& op : report.operators) ops.push_back(operator_json(op));
  json bootstrap{{"pairs", report.bootstrap_pairs}, {"agreements", report.bootstrap_agreements}};
  bootstrap["agreement_rate"] =
      report.bootstrap_pairs == 0
          ? json(nullptr)
          : json(static_cast<double>(report.bootstrap_agreements) /
                 static_cast<double>(report.bootstrap_pairs));
  return json{{"schema_version", kReportSchemaVersion},
              {"env", to_string(report.env)},
              {"algorithm", to_string(report.algorithm)},
              {"n", report.n},
              {"seed", report.seed},
              {"generators", report.generators},
              {"operators", ops},
              {"empty_scope", report.empty_scope},
              {"mutation_score",
               report.empty_scope ? json(nullptr) : json(report.mutation_score)},
              {"sensitivity", optional_json(report.sensitivity)},
              {"bootstrap", bootstrap}};
}

MutationReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ValidationError("report: unsupported schema_version");
    MutationReport r;
    r.env = env_kind_from_string(j.at("env").get<std::string>());
    r.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    r.n = j.at("n").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.generators = j.at("generators").get<std::vector<std::string>>();
    for (const json& op : j.at("operators")) r.operators.push_back(operator_from(op));
    r.empty_scope = j.at("empty_scope").get<bool>();
    if (!j.at("mutation_score").is_null())
      r.mutation_score = j.at("mutation_score").get<std::map<std::string, double>>();
    r.sensitivity = optional_from<double>(j.at("sensitivity"));
    r.bootstrap_pairs = j.at("bootstrap").at("pairs").get<std::size_t>();
    r.bootstrap_agreements = j.at("bootstrap").at("agreements").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

MutationReport load_report(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw MissingArtifactError(path.string() + " does not exist; run the score phase first");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": not valid JSON (" + e.what() + ")");
  }
  return report_from_json(j);
}

std::optional<double> recompute_mutation_score(const MutationReport& report,
                                               const std::string& generator) {
  std::vector<std::vector<double>> rates;
  for (const OperatorReport& op : report.operators) {
    if (!op.representative) continue;
    const auto it = op.scores.find(generator);
    if (it == op.scores.end()) return std::nullopt;
    rates.push_back({it->second});
  }
  if (rates.empty()) return std::nullopt;
  return mutation_score(rates);
}

std::string report_csv(const MutationReport& report) {
  std::ostringstream s;
  s << "operator,j,value,generator,killable,trivial_ratio,trivial,representative,n,weaker,"
       "killed_count,kill_rate,killed,degenerate\n";
  auto row = [&](const OperatorReport& op, const ConfigReport& c, const std::string& gen,
                 const KillRecord& k) {
    s << to_string(op.op) << ',' << c.spec.j << ',' << num(c.spec.value) << ',' << gen << ','
      << (c.killable ? "true" : "false") << ','
      << (c.trivial_ratio ? num(*c.trivial_ratio) : std::string()) << ','
      << (c.trivial ? "true" : "false") << ',' << (c.representative ? "true" : "false") << ','
      << k.n() << ',' << k.weaker << ',' << k.killed_count << ',' << num(k.rate) << ','
      << (k.killed ? "true" : "false") << ',' << (k.degenerate ? "true" : "false") << '\n';
  };
  for (const OperatorReport& op : report.operators) {
    for (const ConfigReport& c : op.configs) {
      row(op, c, "trs", c.replay);
      for (const std::string& gen : report.generators) {
        const auto it = c.generators.find(gen);
        if (it != c.generators.end()) row(op, c, gen, it->second);
      }
    }
  }
  return s.str();
}

std::string kills_csv(const MutationReport& report) {
  std::ostringstream s;
  s << "operator,j,value,generator,instance,s_o,f_o,s_m,f_m,p_value,verdict\n";
  auto rows = [&](const OperatorReport& op, const ConfigReport& c, const std::string& gen,
                  const KillRecord& k) {
    for (std::size_t i = 0; i < k.pairs.size(); ++i) {
      const PairResult& p = k.pairs[i];
      s << to_string(op.op) << ',' << c.spec.j << ',' << num(c.spec.value) << ',' << gen << ','
        << i << ',' << p.table.s_o << ',' << p.table.f_o << ',' << p.table.s_m << ','
        << p.table.f_m << ',' << num(p.p_value) << ',' << to_string(p.verdict) << '\n';
    }
  };
  for (const OperatorReport& op : report.operators) {
    for (const ConfigReport& c : op.configs) {
      rows(op, c, "trs", c.replay);
      for (const std::string& gen : report.generators) {
        const auto it = c.generators.find(gen);
        if (it != c.generators.end()) rows(op, c, gen, it->second);
      }
    }
  }
  return s.str();
}

std::vector<std::filesystem::path> emit_plots(const MutationReport& report,
                                              const std::filesystem::path& dir) {
  if (report.empty_scope) return {};
  static constexpr const char* kWeakFill = "#9ecae1";
  static constexpr const char* kStrongFill = "#3182bd";
  static constexpr const char* kSensFill = "#e6550d";

  std::vector<Group> ms_groups;
  std::vector<Group> sens_groups;
  for (const OperatorReport& op : report.operators) {
    if (!op.representative) continue;
    const auto score = [&](const char* gen) {
      const auto it = op.scores.find(gen);
      return it == op.scores.end() ? 0.0 : it->second;
    };
    const std::string label(to_string(op.op));
    ms_groups.push_back(Group{label, {{score("weak"), kWeakFill}, {score("strong"), kStrongFill}}});
    sens_groups.push_back(Group{label, {{op.sensitivity.value_or(0.0), kSensFill}}});
  }

  std::filesystem::create_directories(dir);
  const auto ms_path = dir / "ms.svg";
  const auto sens_path = dir / "sensitivity.svg";
  write_file_atomic(ms_path, bar_chart("Mutation score per operator (representative config)",
                                       ms_groups, {{"Weak", kWeakFill}, {"Strong", kStrongFill}}));
  write_file_atomic(sens_path, bar_chart("Sensitivity per operator", sens_groups,
                                         {{"Sensitivity", kSensFill}}));
  return {ms_path, sens_path};
}

}  // namespace rlmut
