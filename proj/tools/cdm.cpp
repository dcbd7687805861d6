#include "cli.hpp"

int main(int argc, char** argv) { return cdm::cli::run(argc, argv); }
