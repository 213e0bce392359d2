# dy-verify — exact ħ-adic series verification kernel
