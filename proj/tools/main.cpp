#include "skagree/cli.hpp"

int main(int argc, char** argv) { return skagree::dispatch(argc, argv); }
