#include <doctest.h>
TEST_SUITE_BEGIN("transport");
TEST_SUITE_END();
