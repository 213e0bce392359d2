# Kernels — symbolic rational kernels and the identity catalog
