#include "vstain/cli.hpp"
#include "vstain/malloc_tuning.hpp"

int main(int argc, char** argv) {
  vstain::keep_large_allocations();
  return vstain::run_cli(argc, argv);
}
