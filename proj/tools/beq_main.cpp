#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "beq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "In-memory RDF store and query engine for SELECT queries over basic "
      "graph patterns with UNION and OPTIONAL"};
  beq::RunConfig cfg;
  std::string mode = "base";
  app.add_option("--data", cfg.dataPath, "N-Triples data file")->required();
  app.add_option("--query", cfg.queryPaths,
                 "query file; repeat the flag to run several")
      ->required();
  app.add_option("--mode", mode,
                 "evaluation mode: base | tt (plan rewriting) | cp (candidate "
                 "pruning) | full (both)")
      ->check(CLI::IsMember({"base", "tt", "cp", "full"}));
  app.add_option("--cp-threshold", cfg.thresholdRatio,
                 "candidate threshold as a fraction of the triple count");
  app.add_flag("--explain", cfg.explain,
               "print plans, applied rewrites with their cost deltas, and "
               "coalescing notes");
  app.add_flag("--stats", cfg.stats, "print per-query statistics");
  app.add_flag("--parallel", cfg.parallel,
               "evaluate distinct queries concurrently");
  app.add_option("--seed", cfg.seed, "sampling seed for cardinality estimates");
  app.add_option("--timeout-us", cfg.timeoutUs,
                 "per-query evaluation time budget in microseconds");
  CLI11_PARSE(app, argc, argv);
  cfg.mode = beq::parse_mode(mode);
  return beq::run(cfg, std::cout, std::cerr);
}
