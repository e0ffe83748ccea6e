#include <string>
#include <vector>

#include "gaitrep/cli/commands.h"

int main(int argc, char** argv) {
  return gaitrep::cli::RunCli(std::vector<std::string>(argv + 1, argv + argc));
}
