#include "opdyn/app.hpp"

int main(int argc, char** argv) { return opdyn::app::run_cli(argc, argv); }
