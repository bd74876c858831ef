// Scenario-driven front end. Subcommands:
//   nucc run <scenario.json>   execute a pipeline, write artifacts
//   nucc catalog [filter]      list built-in systems
//   nucc quickcheck <id>       fast sanity pass over one catalog system

#include <cstdio>

#include "CLI11.hpp"
#include "nucc/catalog.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for time-varying controllability"};
  app.require_subcommand(1);

  std::string filter;
  auto* cat = app.add_subcommand("catalog", "list built-in systems");
  cat->add_option("filter", filter, "substring filter on catalog ids");

  CLI11_PARSE(app, argc, argv);

  if (cat->parsed()) {
    for (const auto& e : nucc::catalog_entries()) {
      if (!filter.empty() && e.id.find(filter) == std::string::npos) continue;
      std::printf("%s\n", e.id.c_str());
    }
    return 0;
  }
  return 0;
}
