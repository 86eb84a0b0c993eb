#include "cartan_sync_cli/commands.hpp"

int main(int argc, char** argv) { return cartan_sync::cli::Main(argc, argv); }
