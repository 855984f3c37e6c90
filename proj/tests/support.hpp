#pragma once

#include "oracles.hpp"

#include <catch_amalgamated.hpp>
