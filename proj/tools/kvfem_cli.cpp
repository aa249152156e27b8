#include "kvfem/cli.hpp"

int main(int argc, char** argv) { return kvfem::run_cli(argc, argv); }
