#include "qcost/cli.hpp"

int main(int argc, char** argv) { return qcost::dispatch(argc, argv); }
