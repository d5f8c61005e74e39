#include <catch2/catch_amalgamated.hpp>
#include "pfrac/pfrac.hpp"
