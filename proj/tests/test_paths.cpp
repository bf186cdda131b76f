#include <doctest.h>
TEST_SUITE_BEGIN("paths");
TEST_SUITE_END();
