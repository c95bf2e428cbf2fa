// Writes a deterministic synthetic perimeter-firewall CSV to stdout.
#include <iostream>

#include <CLI11.hpp>

#include "support/synthetic_log.hpp"

int main(int argc, char** argv) {
  firelog::testing::SyntheticLogOptions o;
  CLI::App app{"Synthetic firewall log generator", "firelog-synth"};
  app.add_option("--rows", o.rows, "Regular rows");
  app.add_option("--outliers", o.outliers, "Extreme rows mixed in");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--inside-hosts", o.inside_hosts, "Hosts in 10.32.0.0/16");
  app.add_option("--outside-hosts", o.outside_hosts, "External hosts");
  CLI11_PARSE(app, argc, argv);
  std::cout << firelog::testing::synthetic_firewall_csv(o);
  return 0;
}
