#include "qls/cli.hpp"

int main(int argc, char** argv) { return qls::cli::run(argc, argv); }
