#pragma once

#define TRTLAB_VERSION_MAJOR 0
#define TRTLAB_VERSION_MINOR 1
#define TRTLAB_VERSION_PATCH 0
#define TRTLAB_VERSION_STRING "0.1.0"
