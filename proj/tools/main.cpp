#include "cli.hpp"

int main(int argc, char** argv) { return civqr::cli::run(argc, argv); }
