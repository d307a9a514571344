#include "relgraph/cli.hpp"

int main(int argc, char** argv) {
  return relgraph::run_cli(argc, argv);
}
