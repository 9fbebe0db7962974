#pragma once

// Command-line driver: compose, lts and check. Kept in a header so that it
// can be run in-process by tests.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "chorconf/aut.hpp"
#include "chorconf/bpmn_xml.hpp"
#include "chorconf/composition.hpp"
#include "chorconf/conformance.hpp"
#include "chorconf/semantics.hpp"
#include "chorconf/text_syntax.hpp"

namespace chorconf::cli {

enum ExitCode : int { ok = 0, usage = 1, composition = 2, bounds = 3, nonconformance = 4 };

enum class Format { automatic, text, bpmn_xml, aut };
enum class ReportFormat { human, machine };

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content)) throw std::runtime_error("cannot write '" + path + "'");
}

inline Format resolve(Format f, const std::string& path) {
  if (f != Format::automatic) return f;
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".aut") return Format::aut;
  if (ext == ".bpmn" || ext == ".xml") return Format::bpmn_xml;
  return Format::text;
}

// Strips comments and whitespace to see whether a text model opens with a pool.
inline bool looks_like_collaboration(const std::string& src) {
  std::size_t i = 0;
  while (i < src.size()) {
    if (std::isspace(static_cast<unsigned char>(src[i]))) {
      ++i;
    } else if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') ++i;
    } else {
      break;
    }
  }
  return src.compare(i, 4, "pool") == 0 && (i + 4 >= src.size() || !text::is_identifier_char(src[i + 4]));
}

using AnyModel = std::variant<Choreography, Collaboration, Lts>;

inline AnyModel load_model(const std::string& path, Format format) {
  switch (resolve(format, path)) {
    case Format::aut:
      return parse_aut(read_file(path));
    case Format::bpmn_xml: {
      auto doc = BpmnDocument::from_file(path);
      if (!doc.root().children("choreography").empty()) return load_choreography(doc);
      return load_collaboration(doc);
    }
    default: {
      auto src = read_file(path);
      if (looks_like_collaboration(src)) return parse_collaboration(src);
      return parse_choreography(src);
    }
  }
}

inline Process load_process_file(const std::string& path, Format format) {
  if (resolve(format, path) == Format::bpmn_xml) {
    auto doc = BpmnDocument::from_file(path);
    auto procs = doc.root().children("process");
    if (procs.empty()) throw MalformedModelError("'" + path + "' contains no process");
    return load_process(doc, procs.front().id());
  }
  return parse_process(read_file(path));
}

inline std::vector<ParticipantName> participant_names(const std::vector<std::string>& files,
                                                      const std::vector<std::string>& names) {
  std::vector<ParticipantName> out;
  if (names.empty()) {
    for (auto& f : files) out.emplace_back(std::filesystem::path(f).stem().string());
  } else {
    for (auto& n : names) {
      if (!text::is_identifier(n)) throw std::invalid_argument("bad participant name '" + n + "'");
      out.emplace_back(n);
    }
  }
  return out;
}

inline Collaboration compose_files(const std::vector<std::string>& files, const std::vector<std::string>& names,
                                   Format format) {
  std::vector<Process> ps;
  for (auto& f : files) ps.push_back(load_process_file(f, format));
  return compose(ps, participant_names(files, names));
}

inline std::string label_set_str(const LabelSet& ls) {
  std::string s = "{";
  bool first = true;
  for (auto& l : ls) {
    s += (first ? "" : ", ") + l.str();
    first = false;
  }
  return s + "}";
}

inline std::string machine_line(const ConformanceResult& r) {
  std::string s = std::string("verdict relation=") + to_string(r.relation) + " result=" + (r.verdict ? "true" : "false");
  if (!r.counterexample) return s;
  auto labels = [](const std::vector<Label>& ls) {
    std::string t;
    for (std::size_t i = 0; i < ls.size(); ++i) t += (i ? ";" : "") + ls[i].str();
    return t;
  };
  if (auto* t = std::get_if<DistinguishingTrace>(&*r.counterexample))
    return s + " side=" + to_string(t->side) + " trace=" + labels(t->trace);
  auto& p = std::get<NonSimulablePair>(*r.counterexample);
  std::vector<Label> moves;
  for (auto& g : p.path) moves.push_back(g.label);
  return s + " side=" + to_string(p.side) + " path=" + labels(moves) + " label=" + p.label.str() +
         " states=" + std::to_string(p.choreo_state) + "," + std::to_string(p.collab_state);
}

inline void human_report(std::ostream& out, const ConformanceResult& r) {
  out << to_string(r.relation) << ": " << (r.verdict ? "true" : "false") << "\n";
  if (!r.counterexample) return;
  if (auto* t = std::get_if<DistinguishingTrace>(&*r.counterexample)) {
    out << "  counterexample: " << join_labels(t->trace) << "\n";
    out << "  admitted only by the " << to_string(t->side) << "\n";
  } else {
    out << "  counterexample: " << describe(*r.counterexample) << "\n";
  }
}

struct BoundOptions {
  std::size_t max_tokens = ExplorationBounds{}.max_tokens_per_edge;
  std::size_t max_messages = ExplorationBounds{}.max_messages_per_edge;
  std::size_t max_states = ExplorationBounds{}.max_states;

  ExplorationBounds bounds() const { return {max_tokens, max_messages, max_states}; }

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-tokens", max_tokens, "Largest token count allowed on a sequence edge")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-messages", max_messages, "Largest message count allowed on a message edge")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-states", max_states, "Largest number of reachable states")->check(CLI::PositiveNumber);
  }
};

inline const std::map<std::string, Format>& format_names() {
  static const std::map<std::string, Format> m{
      {"auto", Format::automatic}, {"text", Format::text}, {"bpmn-xml", Format::bpmn_xml}, {"aut", Format::aut}};
  return m;
}

}  // namespace detail

/// Runs the command line `args` (without the program name). Returns the
/// process exit status.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conformance checking of BPMN collaborations against choreographies"};
  app.require_subcommand(1);

  // compose
  std::vector<std::string> compose_files, compose_names;
  std::string compose_out;
  Format compose_format = Format::automatic;
  auto* compose_cmd = app.add_subcommand("compose", "Compose processes into a collaboration");
  compose_cmd->add_option("processes", compose_files, "Process files")->required()->check(CLI::ExistingFile);
  compose_cmd->add_option("--names", compose_names, "Participant names, one per process (default: file stems)")
      ->delimiter(',');
  compose_cmd->add_option("-o,--out", compose_out, "Write the collaboration here instead of stdout");
  compose_cmd->add_option("--format", compose_format, "Input format")
      ->transform(CLI::CheckedTransformer(detail::format_names()));

  // lts
  std::string lts_input, lts_out;
  Format lts_format = Format::automatic;
  detail::BoundOptions lts_bounds;
  auto* lts_cmd = app.add_subcommand("lts", "Generate the LTS of a choreography or collaboration");
  lts_cmd->add_option("model", lts_input, "Model file")->required()->check(CLI::ExistingFile);
  lts_cmd->add_option("--format", lts_format, "Input format")
      ->transform(CLI::CheckedTransformer(detail::format_names()));
  lts_cmd->add_option("-o,--out", lts_out, "Write the LTS in .aut format");
  lts_bounds.attach(lts_cmd);

  // check
  std::string check_choreo, check_collab, relation = "both", report = "human";
  std::vector<std::string> check_processes, check_names;
  Format check_format = Format::automatic;
  detail::BoundOptions check_bounds;
  auto* check_cmd = app.add_subcommand("check", "Check a collaboration against a choreography");
  check_cmd->add_option("choreography", check_choreo, "Choreography file")->required()->check(CLI::ExistingFile);
  auto* collab_opt =
      check_cmd->add_option("collaboration", check_collab, "Collaboration file")->check(CLI::ExistingFile);
  auto* procs_opt = check_cmd->add_option("--processes", check_processes, "Process files to compose")
                        ->delimiter(',')
                        ->check(CLI::ExistingFile);
  check_cmd->add_option("--names", check_names, "Participant names for --processes")->delimiter(',');
  collab_opt->excludes(procs_opt);
  check_cmd->add_option("--relation", relation, "Relation to check")->check(CLI::IsMember({"bbc", "tbc", "both"}));
  check_cmd->add_option("--report", report, "Report format")->check(CLI::IsMember({"human", "machine"}));
  check_cmd->add_option("--format", check_format, "Input format")
      ->transform(CLI::CheckedTransformer(detail::format_names()));
  check_bounds.attach(check_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (compose_cmd->parsed()) {
      Collaboration c = detail::compose_files(compose_files, compose_names, compose_format);
      auto report = well_composed(c);
      if (compose_out.empty())
        out << print_model(c);
      else
        detail::write_file(compose_out, print_model(c));
      if (report.ok()) {
        (compose_out.empty() ? err : out) << "well-composed: yes\n";
        return ok;
      }
      for (auto& e : report.errors) err << describe(e) << "\n";
      return composition;
    }

    if (lts_cmd->parsed()) {
      auto model = detail::load_model(lts_input, lts_format);
      Lts lts = std::visit(
          [&](const auto& m) -> Lts {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Lts>)
              return m;
            else
              return generate_lts(m, lts_bounds.bounds());
          },
          model);
      if (!lts_out.empty()) detail::write_file(lts_out, export_aut(lts));
      out << lts.state_count << " states, " << lts.transitions.size() << " transitions\n";
      return ok;
    }

    // check
    auto choreo_model = detail::load_model(check_choreo, check_format);
    if (std::holds_alternative<Collaboration>(choreo_model))
      throw std::runtime_error("'" + check_choreo + "' is a collaboration, expected a choreography");
    std::variant<Collaboration, Lts> collab_model;
    if (!check_processes.empty()) {
      collab_model = detail::compose_files(check_processes, check_names, check_format);
    } else if (!check_collab.empty()) {
      auto m = detail::load_model(check_collab, check_format);
      if (std::holds_alternative<Choreography>(m))
        throw std::runtime_error("'" + check_collab + "' is a choreography, expected a collaboration");
      if (auto* c = std::get_if<Collaboration>(&m))
        collab_model = std::move(*c);
      else
        collab_model = std::get<Lts>(std::move(m));
    } else {
      err << "check: give either a collaboration file or --processes\n";
      return usage;
    }

    ExplorationBounds b = check_bounds.bounds();
    Lts choreo_lts = std::holds_alternative<Lts>(choreo_model) ? std::get<Lts>(choreo_model)
                                                                : generate_lts(std::get<Choreography>(choreo_model), b);
    Lts collab_lts = std::holds_alternative<Lts>(collab_model)
                         ? std::get<Lts>(collab_model)
                         : generate_lts(std::get<Collaboration>(collab_model), b);
    LabelSet choreo_labels = std::holds_alternative<Choreography>(choreo_model)
                                 ? labels_choreo(std::get<Choreography>(choreo_model))
                                 : choreo_lts.visible_labels();
    LabelSet collab_labels = std::holds_alternative<Collaboration>(collab_model)
                                 ? labels_collab(std::get<Collaboration>(collab_model))
                                 : collab_lts.visible_labels();
    LabelSet hidden = hiding_set(collab_labels, choreo_labels);

    std::vector<Relation> relations;
    if (relation != "bbc") relations.push_back(Relation::tbc);
    if (relation != "tbc") relations.push_back(Relation::bbc);
    bool all = true;
    if (report == "human" && !hidden.empty()) out << "hidden: " << detail::label_set_str(hidden) << "\n";
    for (Relation r : relations) {
      auto res = check(r, choreo_lts, collab_lts, hidden);
      all = all && res.verdict;
      if (report == "machine")
        out << detail::machine_line(res) << "\n";
      else
        detail::human_report(out, res);
    }
    return all ? ok : nonconformance;
  } catch (const CompositionFailure& e) {
    err << "composition failed\n";
    for (auto& x : e.errors()) err << describe(x) << "\n";
    return composition;
  } catch (const BoundExceeded& e) {
    err << e.what() << "\n";
    return bounds;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage;
  }
}

}  // namespace chorconf::cli
