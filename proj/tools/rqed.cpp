#include "rqed/cli/app.hpp"

int main(int argc, char** argv) { return rqed::cli::main_entry(argc, argv); }
