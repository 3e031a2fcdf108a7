#pragma once

#include "arith.hpp"
#include "bias.hpp"
#include "cyclotomic.hpp"
#include "errors.hpp"
#include "group.hpp"
#include "io.hpp"
#include "lemmas.hpp"
#include "maps.hpp"
#include "random.hpp"
#include "smith.hpp"
#include "spectrum.hpp"
#include "structure.hpp"
#include "tensor.hpp"
#include "torus.hpp"
