#include <doctest.h>
TEST_SUITE_BEGIN("oracles");
TEST_SUITE_END();
