#pragma once

// The `dalog` command line: check, founded, models and query.
//
// Exit status 0 on success, 1 on parse or semantic errors, 2 on usage
// errors. Results go to `out`, diagnostics to `err`.

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dalog/constraint.hpp"
#include "dalog/parser.hpp"

namespace dalog {

struct CliConfig {
  std::string command;
  std::vector<std::string> files;
  std::string unit;
  std::string atom;
  std::string format = "text";
  bool models = false;
  bool allow_circular = false;
};

namespace cli {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json constant_json(const Constant& c, const ProgramResult& r) {
  if (c.is_int()) return c.as_int();
  if (c.is_symbol()) return c.as_symbol();
  const auto& m = c.as_model();
  auto idx = r.model_index(m);
  json out = {{"unit", m.source_unit}};
  out["model"] = idx ? json(*idx) : json(nullptr);
  return out;
}

inline json tuple_json(const Atom& a, const ProgramResult& r) {
  json t = json::array();
  for (const auto& c : a.args) t.push_back(constant_json(c, r));
  return t;
}

inline std::string tuple_text(const Atom& a, const ModelNamer& namer) {
  std::string out = "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += to_string(a.args[i], namer);
  }
  return out + ")";
}

inline std::vector<const UnitResult*> selected(const ProgramResult& r, const std::string& unit) {
  std::vector<const UnitResult*> out;
  if (!unit.empty()) {
    out.push_back(&r.at(unit));
    return out;
  }
  for (const auto& u : r.units) out.push_back(&u);
  std::sort(out.begin(), out.end(), [](const UnitResult* a, const UnitResult* b) { return a->name() < b->name(); });
  return out;
}

inline Program load_files(const std::vector<std::string>& files) {
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error(ErrorKind::Parse, "cannot read file '" + f + "'", SourceSpan{f, 1, 1});
    std::stringstream ss;
    ss << in.rdbuf();
    sources.emplace_back(ss.str(), f);
  }
  return parse_sources(sources);
}

inline int cmd_check(const CliConfig& cfg, std::ostream& out) {
  auto units = load_program(load_files(cfg.files), ExpandOptions{cfg.allow_circular, 10000});
  std::sort(units.begin(), units.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  if (cfg.format == "json") {
    json j = {{"units", json::object()}};
    for (const auto& u : units) {
      if (!cfg.unit.empty() && u.name != cfg.unit) continue;
      json preds = json::object();
      for (const auto& [p, arity] : u.signature)
        preds[p] = {{"arity", arity}, {"meta", meta_kind_name(u.meta_of(p))}, {"default", u.defaulted.count(p) > 0}};
      j["units"][u.name] = {{"predicates", preds}};
    }
    out << j.dump(2) << "\n";
    return 0;
  }
  bool found = cfg.unit.empty();
  for (const auto& u : units) {
    if (!cfg.unit.empty() && u.name != cfg.unit) continue;
    found = true;
    out << "kunit " << u.name << "\n";
    for (const auto& [p, arity] : u.signature)
      out << "  " << p << ": " << meta_kind_name(u.meta_of(p)) << (u.defaulted.count(p) ? " (default)" : "") << "\n";
  }
  if (!found) throw Error(ErrorKind::UnknownUnit, "no kunit named '" + cfg.unit + "'");
  return 0;
}

inline ProgramResult evaluate(const CliConfig& cfg, bool models) {
  EvalOptions opts;
  opts.expand.allow_circular_use = cfg.allow_circular;
  if (models && !cfg.unit.empty()) opts.models_for.insert(cfg.unit);
  return eval_program(load_files(cfg.files), opts);
}

inline int cmd_founded(const CliConfig& cfg, std::ostream& out) {
  ProgramResult r = evaluate(cfg, false);
  auto units = selected(r, cfg.unit);
  ModelNamer namer = r.namer();
  if (cfg.format == "json") {
    json j = {{"units", json::object()}};
    for (const UnitResult* u : units) {
      json preds = json::object();
      for (const auto& [p, arity] : u->unit().signature) preds[p] = {{"true", json::array()}, {"false", json::array()}, {"undefined", json::array()}};
      for (const auto& a : u->engine().atoms()) {
        const char* key = "undefined";
        if (u->founded().true_atoms().count(a)) key = "true";
        if (u->founded().false_atoms().count(a)) key = "false";
        preds[a.pred][key].push_back(tuple_json(a, r));
      }
      j["units"][u->name()] = {{"founded", preds}};
    }
    out << j.dump(2) << "\n";
    return 0;
  }
  for (const UnitResult* u : units) {
    out << "kunit " << u->name() << "\n";
    std::map<std::string, std::map<std::string, std::vector<std::string>>> table;
    for (const auto& [p, arity] : u->unit().signature) table[p] = {{"true", {}}, {"false", {}}, {"undefined", {}}};
    for (const auto& a : u->engine().atoms()) {
      const char* key = "undefined";
      if (u->founded().true_atoms().count(a)) key = "true";
      if (u->founded().false_atoms().count(a)) key = "false";
      table[a.pred][key].push_back(tuple_text(a, namer));
    }
    for (const auto& [p, sections] : table) {
      out << "  " << p << "\n";
      for (const char* key : {"true", "false", "undefined"}) {
        out << "    " << key << ":";
        for (const auto& t : sections.at(key)) out << " " << t;
        out << "\n";
      }
    }
  }
  return 0;
}

inline int cmd_models(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.unit.empty()) throw UsageError("models requires --unit");
  ProgramResult r = evaluate(cfg, true);
  const UnitResult& u = r.at(cfg.unit);
  ModelNamer namer = r.namer();
  const auto& models = u.models();
  if (cfg.format == "json") {
    json list = json::array();
    for (const auto& m : models) {
      json atoms = json::array();
      for (const auto& a : m->true_atoms) atoms.push_back(to_string(a, namer));
      list.push_back(atoms);
    }
    json j = {{"units", {{u.name(), {{"models", list}}}}}};
    out << j.dump(2) << "\n";
  } else {
    out << u.name() << ": " << models.size() << (models.size() == 1 ? " model" : " models") << "\n";
    for (std::size_t i = 0; i < models.size(); ++i) {
      out << "  [" << i << "] {";
      for (std::size_t k = 0; k < models[i]->true_atoms.size(); ++k)
        out << (k ? ", " : "") << to_string(models[i]->true_atoms[k], namer);
      out << "}\n";
    }
  }
  if (models.empty()) err << "note: kunit '" << u.name() << "' has no constraint models\n";
  return 0;
}

inline Atom resolve_query_atom(const QueryAtom& q, const ProgramResult& r) {
  Atom a{q.pred, {}};
  for (const auto& arg : q.args) {
    if (arg.value) {
      a.args.push_back(*arg.value);
      continue;
    }
    const UnitResult& src = r.at(arg.model_unit);
    const auto& ms = src.models();
    if (arg.model_index >= ms.size())
      throw Error(ErrorKind::UnknownAtom, arg.model_unit + ".CS has " + std::to_string(ms.size()) + " models, no [" +
                                              std::to_string(arg.model_index) + "]");
    a.args.push_back(Constant::model(ms[arg.model_index]));
  }
  return a;
}

inline int cmd_query(const CliConfig& cfg, std::ostream& out) {
  if (cfg.unit.empty() || cfg.atom.empty()) throw UsageError("query requires --unit and --atom");
  QueryAtom q;
  try {
    q = parse_query_atom(cfg.atom);
  } catch (const Error& e) {
    throw UsageError(std::string("malformed atom: ") + e.what());
  }
  ProgramResult r = evaluate(cfg, cfg.models);
  Atom a = resolve_query_atom(q, r);
  QueryResult res = query(r, cfg.unit, a, cfg.models);
  if (cfg.format == "json") {
    json j = {{"unit", cfg.unit}, {"atom", to_string(a, r.namer())}, {"founded", std::string(1, truth_char(res.founded))}};
    if (res.models) {
      json ms = json::array();
      for (bool b : *res.models) ms.push_back(b ? "T" : "F");
      j["models"] = ms;
    }
    out << j.dump(2) << "\n";
    return 0;
  }
  out << truth_char(res.founded) << "\n";
  if (res.models) {
    out << "models:";
    for (std::size_t i = 0; i < res.models->size(); ++i) out << (i ? "," : " ") << ((*res.models)[i] ? 'T' : 'F');
    out << "\n";
  }
  return 0;
}

}  // namespace cli

/// Runs the command line given without the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate DA logic programs", "dalog"};
  app.require_subcommand(1);
  CliConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("files", cfg.files, "Input .dal files")->required();
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_flag("--allow-circular-use", cfg.allow_circular, "Allow circular uses of kunits");
  };
  CLI::App* check = app.add_subcommand("check", "Parse, expand and validate; list meta-constraints");
  add_common(check);
  check->add_option("--unit", cfg.unit, "Only this kunit");
  CLI::App* founded_cmd = app.add_subcommand("founded", "Print the founded model");
  add_common(founded_cmd);
  founded_cmd->add_option("--unit", cfg.unit, "Only this kunit");
  CLI::App* models_cmd = app.add_subcommand("models", "Print the constraint models of a kunit");
  add_common(models_cmd);
  models_cmd->add_option("--unit", cfg.unit, "The kunit");
  CLI::App* query_cmd = app.add_subcommand("query", "Print the truth value of one atom");
  add_common(query_cmd);
  query_cmd->add_option("--unit", cfg.unit, "The kunit");
  query_cmd->add_option("--atom", cfg.atom, "Ground atom, e.g. 'win(1)'");
  query_cmd->add_flag("--models", cfg.models, "Also print the value in each constraint model");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  for (CLI::App* sub : {check, founded_cmd, models_cmd, query_cmd})
    if (sub->parsed()) cfg.command = sub->get_name();

  try {
    if (cfg.command == "check") return cli::cmd_check(cfg, out);
    if (cfg.command == "founded") return cli::cmd_founded(cfg, out);
    if (cfg.command == "models") return cli::cmd_models(cfg, out, err);
    return cli::cmd_query(cfg, out);
  } catch (const cli::UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
}

}  // namespace dalog
