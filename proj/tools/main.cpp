#include "cli.hpp"

int main(int argc, char** argv)
{
  return obsopt::cli::run(argc, argv);
}
