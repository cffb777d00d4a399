#include "wavecert/cli.hpp"

int main(int argc, char** argv) { return wavecert::cli::run(argc, argv); }
