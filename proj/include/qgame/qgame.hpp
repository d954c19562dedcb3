#pragma once

#include "qgame/matrix.hpp"
#include "qgame/random.hpp"
#include "qgame/quadratic.hpp"
#include "qgame/game.hpp"
#include "qgame/sphere.hpp"
#include "qgame/minmax.hpp"
#include "qgame/oracle.hpp"
#include "qgame/io.hpp"
#include "qgame/commands.hpp"
