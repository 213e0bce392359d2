# Series — exact ħ-adic formal series engine
