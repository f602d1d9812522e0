#include "cardio/cli/app.hpp"

int main(int argc, char** argv) { return cardio::cli::run(argc, argv); }
