#include "cli.hpp"

int
main(int argc, char** argv)
{
  return adasmooth::cli::run(argc, argv);
}
