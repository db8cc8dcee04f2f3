#include "sperner_cli.hpp"

int main(int argc, char** argv) { return sperner::cli::run(argc, argv); }
