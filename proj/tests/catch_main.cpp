// Catch2 v3 amalgamated implementation; provides main() unless
// CATCH_AMALGAMATED_CUSTOM_MAIN is defined.
#include <catch2/catch_amalgamated.cpp>
