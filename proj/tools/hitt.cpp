// Command-line front end: check files, normalize definitions, solve coherence
// goals, run corpus tiers and build the finite James model.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hitt/corpus.hpp"
#include "hitt/kernel.hpp"
#include "hitt/session.hpp"
#include "hitt/set_model.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

int exit_code_for(const hitt::Error& e) {
  switch (e.kind()) {
  case hitt::ErrorKind::ParseError:
  case hitt::ErrorKind::Io:
    return kUsage;
  default:
    return kDomainFailure;
  }
}

struct Common {
  std::uint64_t fuel = hitt::kDefaultFuel;
  std::size_t coh_depth = hitt::kDefaultCohDepth;
  bool json = false;
  std::string root;

  hitt::CheckOptions options() const {
    hitt::CheckOptions o;
    o.fuel = fuel;
    o.coh_depth = coh_depth;
    o.root = root;
    return o;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--fuel", c.fuel, "head-step budget per declaration")->check(CLI::PositiveNumber);
  app->add_option("--coh-depth", c.coh_depth, "depth limit for coherence search")->check(CLI::PositiveNumber);
  app->add_flag("--json", c.json, "machine-readable output");
  app->add_option("--root", c.root, "directory searched by import");
}

void print_report(const hitt::CheckReport& r, bool json) {
  if (json) {
    std::cout << hitt::to_json(r).dump() << '\n';
    return;
  }
  std::cout << r.name << ": " << r.status << " (" << static_cast<long long>(r.millis) << " ms, " << r.steps
            << " steps";
  if (r.depth) std::cout << ", coherence depth " << r.depth;
  std::cout << ")\n";
  if (!r.message.empty()) std::cerr << "  " << r.message << '\n';
}

hitt::Session load(const std::string& file, const Common& c) {
  if (!std::filesystem::exists(file)) throw hitt::Error(hitt::ErrorKind::Io, "no such file " + file);
  hitt::Session s(c.options());
  s.check_file(file);
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hitt: a small type checker with user rewrite rules"};
  app.require_subcommand(1);
  Common common;

  std::string file;
  auto* check = app.add_subcommand("check", "type-check a file and its imports");
  check->add_option("FILE", file)->required();
  add_common(check, common);

  std::string term;
  auto* nf = app.add_subcommand("nf", "print the normal form of a definition");
  nf->add_option("FILE", file)->required();
  nf->add_option("--term", term, "constant to normalize")->required();
  add_common(nf, common);

  std::string goal;
  auto* coh = app.add_subcommand("coh", "print the witness found for a coherence goal");
  coh->add_option("FILE", file)->required();
  coh->add_option("--goal", goal, "name of a `coh` declaration")->required();
  add_common(coh, common);

  std::string manifest;
  int tier = 1;
  auto* corpus = app.add_subcommand("corpus", "check one tier of a manifest");
  corpus->add_option("MANIFEST", manifest)->required();
  corpus->add_option("--tier", tier, "tier number")->required();
  add_common(corpus, common);

  std::uint32_t m = 0, n = 0;
  auto* model = app.add_subcommand("model", "build and verify the finite James model");
  model->add_option("--m", m, "size of the pointed set")->required()->check(CLI::PositiveNumber);
  model->add_option("--n", n, "number of stages")->required();
  model->add_flag("--json", common.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*check) {
      hitt::Session s(common.options());
      if (!std::filesystem::exists(file)) throw hitt::Error(hitt::ErrorKind::Io, "no such file " + file);
      auto r = hitt::check_one(s, file, file);
      print_report(r, common.json);
      if (r.status == "ok") return kOk;
      return r.status == "ParseError" || r.status == "Io" ? kUsage : kDomainFailure;
    }
    if (*nf) {
      hitt::Session s = load(file, common);
      hitt::Name name(term);
      const auto& info = s.env().at(name);
      hitt::Budget budget{common.fuel};
      hitt::Reducer red(s.env(), budget);
      hitt::Term v = red.nf(hitt::Term::constant(name));
      std::string text = hitt::print(v, {}, {false, &s.env()});
      std::string type = hitt::print(info.type, {}, {false, &s.env()});
      if (common.json)
        std::cout << nlohmann::json{{"name", term}, {"type", type}, {"nf", text}, {"steps", budget.steps}}.dump()
                  << '\n';
      else
        std::cout << term << " : " << type << "\n" << term << " = " << text << '\n';
      return kOk;
    }
    if (*coh) {
      hitt::Session s = load(file, common);
      for (const auto& r : s.cohs()) {
        if (r.name != goal) continue;
        if (common.json)
          std::cout << nlohmann::json{{"name", r.name}, {"witness", r.witness}, {"depth", r.depth}}.dump() << '\n';
        else
          std::cout << r.name << " = " << r.witness << "  (depth " << r.depth << ")\n";
        return kOk;
      }
      throw hitt::Error(hitt::ErrorKind::UnknownConstant, "no coherence goal named " + goal);
    }
    if (*corpus) {
      auto mf = hitt::load_manifest(manifest);
      auto result = hitt::run_tier(mf, tier, common.options());
      if (common.json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : result.reports) arr.push_back(hitt::to_json(r));
        std::cout << arr.dump(2) << '\n';
        for (const auto& r : result.reports)
          if (!r.message.empty()) std::cerr << r.name << ": " << r.message << '\n';
      } else {
        for (const auto& r : result.reports) print_report(r, false);
        std::cout << "tier " << tier << ": " << (result.ok() ? "ok" : "FAILED") << '\n';
      }
      return result.ok() ? kOk : kDomainFailure;
    }
    if (*model) {
      auto jm = hitt::model::build_jn(m, n);
      auto r = hitt::model::verify_model(jm);
      if (common.json)
        std::cout << hitt::model::to_json(r).dump() << '\n';
      else
        std::cout << "J_" << n << " over " << m << " points: " << r.classes << " classes, " << r.words
                  << " words, bijection " << (r.bijection ? "yes" : "no") << ", inclusions "
                  << (r.compatible ? "compatible" : "incompatible") << '\n';
      return r.bijection && r.compatible ? kOk : kDomainFailure;
    }
  } catch (const hitt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsage;
}
