#include "commands.hpp"

int main(int argc, char** argv) { return trisieve::cli::run(argc, argv); }
