import { ReviewClient } from "./api.js";
import { ReviewApp } from "./app.js";

// same-origin by default: the review service serves this page itself
void new ReviewApp(new ReviewClient()).start();
